#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace pwabf {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using RowVec = Eigen::RowVectorXd;

// Geometric tolerance. Tighter than the 1e-8 nonzero test so geometric
// noise never masquerades as slack.
constexpr double kGeomTol = 1e-9;

// Tolerance for deciding whether a number is nonzero (slack sums, validity).
constexpr double kNonzeroTol = 1e-8;

// Tolerance for continuity checks across shared faces.
constexpr double kContinuityTol = 1e-7;

// Vertices closer than this (infinity norm) are merged in the global pool.
constexpr double kVertexMergeTol = 1e-9;

struct Error : std::runtime_error {
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

struct DimensionMismatch : Error {
    using Error::Error;
};
struct UnboundedPolytope : Error {
    using Error::Error;
};
struct EmptyPolytope : Error {
    using Error::Error;
};
struct DegeneratePolytope : Error {
    using Error::Error;
};
struct DegenerateInput : Error {
    using Error::Error;
};
struct OutOfDomain : Error {
    using Error::Error;
};
struct InvalidPartition : Error {
    using Error::Error;
};
struct TooManyNeurons : Error {
    using Error::Error;
};
struct SolverFailure : Error {
    using Error::Error;
};
struct DegenerateSubcell : Error {
    using Error::Error;
};
struct SamplingFailure : Error {
    using Error::Error;
};
struct EmptyPartition : Error {
    using Error::Error;
};

}  // namespace pwabf
