#pragma once

#include "cems/dataset.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <string>

namespace cems {

enum class SyntheticKind { Sine, Hypersphere, Quadratic, Plane };

const char* to_string(SyntheticKind kind);
SyntheticKind parse_synthetic_kind(const std::string& text);

struct SyntheticSpec {
    SyntheticKind kind = SyntheticKind::Sine;
    Index n = 500;
    double noise_sd = 0.0;
    double curvature = 1.0;  // hypersphere only
    Index intrinsic_d = 1;
    Index ambient_D = 2;
    std::uint64_t seed = 0;
};

void validate(const SyntheticSpec& spec);

struct SyntheticData {
    Dataset raw;                 // generator coordinates before any scaling
    Dataset data;                // what is written out (min-max scaled for hyperspheres)
    NormalizationState scaling;  // maps raw -> data
    Eigen::MatrixXd embedding;   // orthonormal columns, ambient x intrinsic
    Eigen::MatrixXd intrinsic;   // generator coordinates (sphere points, plane/quadric parameters)
    double radius = 0.0;         // hypersphere radius
};

/// x uniform on [0, 2 pi], y = sin(x) + N(0, noise_sd^2).
Dataset gen_sine(Index n, double noise_sd, std::uint64_t seed);

/// Radius with the given curvature: sqrt(d (d - 1) / kappa) (scalar curvature)
/// for d >= 2, 1 / sqrt(kappa) (circle) for d = 1.
double sphere_radius(Index intrinsic_d, double curvature);

/// Uniform points on S^d of the radius above, embedded isometrically into
/// R^D by a seeded orthonormal matrix; target sin(sum of sphere coordinates).
/// `data` holds features and target min-max scaled to [0, 1].
SyntheticData gen_hypersphere(Index n, Index intrinsic_d, double curvature, Index ambient_D, std::uint64_t seed,
                              double noise_sd = 0.0);

/// Graph of normal coordinates g^a(u) = 1/2 u^T H^a u over u in [-1, 1]^d,
/// rotated into R^D; the last joint column is the target.
SyntheticData gen_quadratic(Index n, Index intrinsic_d, Index ambient_D, std::uint64_t seed, double noise_sd = 0.0);

/// d-dimensional affine plane in R^D; the last joint column is the target.
SyntheticData gen_plane(Index n, Index intrinsic_d, Index ambient_D, std::uint64_t seed, double noise_sd = 0.0);

SyntheticData generate(const SyntheticSpec& spec);

/// D x m matrix with orthonormal columns drawn from the seeded generator.
Eigen::MatrixXd random_orthonormal(Index rows, Index cols, std::uint64_t seed);

}  // namespace cems
