// Generates a union-of-subspaces matrix, hides 45% of it, and completes it
// with the plain nuclear-norm program and with the five-step pipeline.

#include <cstdio>

#include "lrfd/lrfd.hpp"

int main() {
    using namespace lrfd;

    const std::size_t n = 100, k = 4, rank = 16;
    const Matrix l0 = gen_subspace_mixture({n, n, k, rank / k, n / k, 7});
    const CoherenceReport coh = coherence(l0);
    std::printf("planted %zux%zu, rank %zu from %zu subspaces: mu1 = %.2f, mu2 = %.2f\n",
                n, n, rank, k, coh.mu1, coh.mu2);

    const ObservationSet omega =
        sample_observations(n, n, UniformExactCount{n * n * 65 / 100}, 8);
    std::printf("observing %zu of %zu entries\n", omega.count(), n * n);

    SolverConfig cfg;
    cfg.lambda = 1e6;
    const SolverReport cono = solve_cono(l0, omega, cfg);
    std::printf("nuclear-norm completion: error %.4g after %zu iterations\n",
                recovery_error(cono.solution, l0), cono.iterations);

    const PipelineResult pipe = run_algorithm1(l0, omega, 1e6);
    std::printf("pipeline (rank estimate %zu): error %.4g\n", pipe.rank_estimate,
                recovery_error(pipe.final_estimate, l0));
    return 0;
}
