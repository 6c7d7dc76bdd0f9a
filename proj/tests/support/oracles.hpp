#pragma once

// Oracles used by the test suites: small, slow, independent reimplementations
// of numeric results that the library computes by other means. They share no
// code with the library internals beyond public types.

#include <Eigen/Dense>
#include <cstdint>
#include <utility>
#include <vector>

namespace chainspec::testing {

// Cyclic Jacobi eigensolver for small symmetric matrices. Returns eigenvalues
// ascending with matching eigenvector columns.
std::pair<Eigen::VectorXd, Eigen::MatrixXd> jacobi_eigs(Eigen::MatrixXd a);

// Midpoint-rule line integral of sum_j nu*exp(-|x - z_j|^2 / (2 sigma^2))
// along the last coordinate axis, at transverse point xperp. step divides
// sigma; the integration range covers every atom plus pad*sigma on each side.
double quadrature_projection(const Eigen::MatrixXd& atoms,  // D x m
                             const Eigen::VectorXd& xperp, double nu,
                             double sigma, double step_fraction = 0.02,
                             double pad = 10.0);

// Brute-force k-nearest-neighbour adjacency (symmetric OR, ties broken by
// index). betas holds one point per column.
Eigen::MatrixXd knn_adjacency(const Eigen::MatrixXd& betas, int k);

// Deterministic xorshift-free splitmix for test seeds.
std::uint64_t mix_seed(std::uint64_t base, std::uint64_t salt);

}  // namespace chainspec::testing
