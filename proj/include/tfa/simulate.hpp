#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "tfa/embedding.hpp"
#include "tfa/model.hpp"
#include "tfa/rng.hpp"
#include "tfa/tree.hpp"

namespace tfa {

// Reference components for the ternary illustrations.
Eigen::Vector3d illustration_d1();  // (1/3, 1/3, 1/3)
Eigen::Vector3d illustration_d2();  // (1/2, 1/3, 1/6)
// Tree splitting {1} | {2,3} then {2} | {3} on 3 categories named c1,c2,c3.
PartitionTree illustration_tree(CategorySpace* space_out = nullptr);

// Two-component mixture: w d1 + (1-w) d2, w ~ Beta(0.25, 0.35).
std::vector<Eigen::VectorXd> simulate_mixture_illustration(int n, Rng& rng);

// Factor construction in embedding space: psi = l1 E(d1) + l2 E(d2) with
// standard normal coefficients; returns invert(psi).
std::vector<Eigen::VectorXd> simulate_factor_illustration(int n, Rng& rng);

struct SimulatedModel {
  CountMatrix counts;
  ModelState truth;                        // Omega zero; K = max(k_true, 1)
  std::vector<Eigen::VectorXd> true_probs; // per location
};

// Prior draw with k_true factors (k_true = 0 forces Lambda = 0), multinomial
// counts with the given per-location total.
SimulatedModel simulate_from_model(const PartitionTree& tree, const CategorySpace& space,
                                   const SpatialWeights& weights,
                                   const Hyperparameters& hyper, int k_true,
                                   long long count_per_location, Rng& rng);

// Ring adjacency over m locations (each touching its two neighbours); the
// default spatial structure for simulations when none is supplied.
SpatialWeights ring_adjacency(int m);

std::vector<std::string> default_location_ids(int m);

}  // namespace tfa
