#pragma once

#include <stdexcept>
#include <string>

namespace casimir {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed input document (mesh, field, area or one-form file, JSON).
class ParseError : public Error {
public:
    using Error::Error;
};

/// Edge with a number of incident triangles other than two, non-manifold
/// vertex star, isolated vertex or disconnected mesh.
class NonManifoldError : public Error {
public:
    using Error::Error;
};

/// Shared edge traversed in the same direction by both incident triangles.
class OrientationError : public Error {
public:
    using Error::Error;
};

/// Sidecar document length does not match the mesh.
class CountMismatch : public Error {
public:
    using Error::Error;
};

/// Non-positive triangle area or otherwise unusable geometry.
class GeometryError : public Error {
public:
    using Error::Error;
};

/// The scalar field is not a simple Morse function.
class NotSimple : public Error {
public:
    using Error::Error;
};

class PerturbFailure : public Error {
public:
    using Error::Error;
};

class OutOfRange : public Error {
public:
    using Error::Error;
};

/// A density with nonzero total mass has no antiderivative.
class NoSolution : public Error {
public:
    NoSolution(const std::string& what, double residual) : Error(what), residual_(residual) {}
    double residual() const noexcept { return residual_; }

private:
    double residual_;
};

class AntiderivativeViolation : public Error {
public:
    AntiderivativeViolation(const std::string& what, int node, double residual)
        : Error(what), node_(node), residual_(residual) {}
    int node() const noexcept { return node_; }
    double residual() const noexcept { return residual_; }

private:
    int node_;
    double residual_;
};

class BadPinPlacement : public Error {
public:
    using Error::Error;
};

class Infeasible : public Error {
public:
    using Error::Error;
};

class InsufficientSamples : public Error {
public:
    using Error::Error;
};

/// Series evaluation requested inside the disk of divergence.
class DivergenceRisk : public Error {
public:
    using Error::Error;
};

class IllConditioned : public Error {
public:
    IllConditioned(const std::string& what, int effective_n, double eps)
        : Error(what), effective_n_(effective_n), eps_(eps) {}
    int effective_n() const noexcept { return effective_n_; }
    double eps() const noexcept { return eps_; }

private:
    int effective_n_;
    double eps_;
};

/// Field file disagrees with the curl of the accompanying one-form.
class InconsistentInput : public Error {
public:
    using Error::Error;
};

class NonZeroMean : public Error {
public:
    using Error::Error;
};

class CFLViolation : public Error {
public:
    using Error::Error;
};

/// Reeb graph signature changed along a simulated trajectory.
class TopologyChange : public Error {
public:
    TopologyChange(const std::string& what, double t) : Error(what), time_(t) {}
    double time() const noexcept { return time_; }

private:
    double time_;
};

}  // namespace casimir
