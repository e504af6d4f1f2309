// Estimates location and scatter of a contaminated Gaussian sample with the
// depth-based estimator and with classical moments, and prints the errors.

#include "fdb/fdb.hpp"

#include <cstdio>

int main()
{
    const std::size_t n = 400, p = 10;
    auto clean = fdb::generate_clean({n, p, 0.0, 2024});
    auto dirty = fdb::contaminate(clean.y, {fdb::ContaminationKind::cluster, 0.2, 5.0}, 7);

    fdb::EstimatorConfig config;
    config.alpha = 0.75;
    const auto robust = fdb::fdb_estimate(dirty.y, config);
    const auto classical = fdb::sample_mean_cov(dirty.y);

    const fdb::Vector mu0(p, 0.0);
    const auto identity = fdb::Matrix::identity(p);
    std::printf("%-10s %8s %8s %8s\n", "estimate", "e_mu", "e_sigma", "KL");
    for (const auto& [name, ls] : {std::pair{"fdb-pro", robust.estimate}, std::pair{"classical", classical}}) {
        const auto m = fdb::evaluate(ls, mu0, identity, 0.0);
        std::printf("%-10s %8.3f %8.3f %8.3f\n", name, m.e_mu, m.e_sigma, m.kl);
    }
    std::printf("c1 = %.4f, c0 = %.4f, %zu of %zu samples kept after reweighting\n", robust.c1, robust.c0,
                static_cast<std::size_t>(std::count(robust.weights.begin(), robust.weights.end(), 1)), n);
}
