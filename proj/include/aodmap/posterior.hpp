#pragma once

#include <span>
#include <vector>

#include "aodmap/forward_model.hpp"
#include "aodmap/lattice.hpp"
#include "aodmap/types.hpp"

namespace aodmap {

// Weighted least-squares misfit of one region over the unmasked channels:
// sum_c (L_pc - L^RT_c(tau_p, theta_p))^2 / (2 sigma2_c).
double chi_square_region(const Scene& scene, const RetrievalState& state, const ForwardModel& forward, int p);

// The log-posterior split into its additive terms.
struct PosteriorTerms {
    double kappa_norm = 0.0;   // ((P - 3) / 2) log kappa
    double noise_norm = 0.0;   // -sum_c ((P + 2) / 2) log(2 pi sigma2_c)
    double misfit = 0.0;       // -sum_p chi2_p
    double smoothness = 0.0;   // -(kappa / 2) sum_edges (tau_a - tau_b)^2
    double dirichlet = 0.0;    // sum_p sum_m (alpha_m - 1) log theta_pm
    double gamma_norm = 0.0;   // log Gamma(sum alpha) - sum log Gamma(alpha_m)

    double total() const { return kappa_norm + noise_norm + misfit + smoothness + dirichlet + gamma_norm; }
};

PosteriorTerms posterior_terms(const Scene& scene, const RetrievalState& state, const HyperParams& hyper,
                               const ForwardModel& forward, const LatticeTopology& lattice);

// Log of the joint posterior up to its data-independent constant.
double log_posterior(const Scene& scene, const RetrievalState& state, const HyperParams& hyper,
                     const ForwardModel& forward, const LatticeTopology& lattice);

// Change in log_posterior when only tau_p is replaced by tau_new.
double delta_log_posterior_tau(const Scene& scene, const RetrievalState& state, const ForwardModel& forward,
                               const LatticeTopology& lattice, int p, double tau_new);

// Change in log_posterior when only theta_p is replaced by theta_new.
double delta_log_posterior_theta(const Scene& scene, const RetrievalState& state, const HyperParams& hyper,
                                 const ForwardModel& forward, int p, std::span<const double> theta_new);

// Change when tau_p and theta_p are replaced together.
double delta_log_posterior_region(const Scene& scene, const RetrievalState& state, const HyperParams& hyper,
                                  const ForwardModel& forward, const LatticeTopology& lattice, int p,
                                  double tau_new, std::span<const double> theta_new);

// Local building blocks shared by the solvers, which supply neighbour values
// from either the live state or a snapshot.
namespace local {

// Misfit for a region given a model radiance vector.
double misfit(std::span<const double> observed, const std::vector<bool>& mask, std::span<const double> sigma2,
              std::span<const double> model);

// sum_m (alpha_m - 1) log max(theta_m, kThetaFloor).
double dirichlet_log_term(std::span<const double> theta, std::span<const double> alpha);

// Change of -(kappa/2) sum_q (tau - tau_q)^2 over q in neighbour_tau when tau_old -> tau_new.
double smoothness_delta(double tau_old, double tau_new, std::span<const double> neighbor_tau, double kappa);

// Sum of squared differences over the edge list, each unordered pair once.
double edge_sum_of_squares(std::span<const double> tau, const LatticeTopology& lattice);

}  // namespace local

}  // namespace aodmap
