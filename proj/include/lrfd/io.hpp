#pragma once

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "lrfd/matrix.hpp"
#include "lrfd/observation.hpp"

namespace lrfd {

// Shared matrix file format: first line "rows,cols", then one text row per
// matrix row, comma-separated, printed with 17 significant digits so the
// round trip is bit-exact for doubles.

inline void write_matrix_csv(const Matrix& m, std::ostream& os) {
    os << m.rows() << ',' << m.cols() << '\n';
    char buf[32];
    for (std::size_t i = 0; i < m.rows(); ++i) {
        for (std::size_t j = 0; j < m.cols(); ++j) {
            std::snprintf(buf, sizeof buf, "%.17g", m(i, j));
            if (j) os << ',';
            os << buf;
        }
        os << '\n';
    }
}

inline void write_matrix_csv(const Matrix& m, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("write_matrix_csv: cannot open " + path);
    write_matrix_csv(m, f);
    if (!f) throw std::runtime_error("write_matrix_csv: write failed on " + path);
}

inline Matrix read_matrix_csv(std::istream& is) {
    std::string line;
    if (!std::getline(is, line))
        throw std::runtime_error("read_matrix_csv: empty input");
    std::size_t rows = 0, cols = 0;
    {
        char comma = 0;
        std::istringstream hdr(line);
        if (!(hdr >> rows >> comma >> cols) || comma != ',' || rows == 0 || cols == 0)
            throw std::runtime_error("read_matrix_csv: malformed header line");
    }
    Matrix m(rows, cols);
    for (std::size_t i = 0; i < rows; ++i) {
        if (!std::getline(is, line))
            throw std::runtime_error("read_matrix_csv: unexpected end of file");
        const char* p = line.c_str();
        for (std::size_t j = 0; j < cols; ++j) {
            char* end = nullptr;
            const double v = std::strtod(p, &end);
            if (end == p)
                throw std::runtime_error("read_matrix_csv: malformed value at row " +
                                         std::to_string(i));
            m(i, j) = v;
            p = end;
            if (j + 1 < cols) {
                if (*p != ',')
                    throw std::runtime_error("read_matrix_csv: expected comma at row " +
                                             std::to_string(i));
                ++p;
            }
        }
    }
    if (!m.is_finite())
        throw std::runtime_error("read_matrix_csv: non-finite entries");
    return m;
}

inline Matrix read_matrix_csv_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("read_matrix_csv: cannot open " + path);
    return read_matrix_csv(f);
}

// Mask file format: first line "rows,cols,count", then one "i,j" line per
// observed entry, 0-based, sorted row-major.

inline void write_mask(const ObservationSet& omega, std::ostream& os) {
    os << omega.rows() << ',' << omega.cols() << ',' << omega.count() << '\n';
    for (const auto& ix : omega.indices()) os << ix.i << ',' << ix.j << '\n';
}

inline void write_mask(const ObservationSet& omega, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("write_mask: cannot open " + path);
    write_mask(omega, f);
    if (!f) throw std::runtime_error("write_mask: write failed on " + path);
}

inline ObservationSet read_mask(std::istream& is) {
    std::string line;
    if (!std::getline(is, line)) throw std::runtime_error("read_mask: empty input");
    std::size_t rows = 0, cols = 0, count = 0;
    {
        char c1 = 0, c2 = 0;
        std::istringstream hdr(line);
        if (!(hdr >> rows >> c1 >> cols >> c2 >> count) || c1 != ',' || c2 != ',')
            throw std::runtime_error("read_mask: malformed header line");
    }
    std::vector<ObservationSet::Index> ix;
    ix.reserve(count);
    for (std::size_t k = 0; k < count; ++k) {
        if (!std::getline(is, line))
            throw std::runtime_error("read_mask: unexpected end of file");
        std::uint32_t i = 0, j = 0;
        char comma = 0;
        std::istringstream row(line);
        if (!(row >> i >> comma >> j) || comma != ',')
            throw std::runtime_error("read_mask: malformed index line " +
                                     std::to_string(k));
        ix.push_back({i, j});
    }
    if (ix.size() != count) throw std::runtime_error("read_mask: count mismatch");
    ObservationSet omega(rows, cols, std::move(ix));
    if (omega.count() != count)
        throw std::runtime_error("read_mask: duplicate indices in file");
    return omega;
}

inline ObservationSet read_mask_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("read_mask: cannot open " + path);
    return read_mask(f);
}

} // namespace lrfd
