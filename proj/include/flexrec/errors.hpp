#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace flexrec {

/** Operand shapes do not agree. */
class DimensionError : public std::invalid_argument
{
public:
    explicit DimensionError(const std::string& what) : std::invalid_argument("dimension mismatch: " + what) {}
};

/** A polyhedron contains a line; none of the objects handled here do. */
class LinealityError : public std::runtime_error
{
public:
    LinealityError() : std::runtime_error("lineality unsupported") {}
};

/**
 * Base class for failures of an optimization routine on well-formed input:
 * infeasibility, unboundedness, exhausted iteration budgets.
 */
class SolverError : public std::runtime_error
{
public:
    SolverError(std::string code, const std::string& what) : std::runtime_error(what), code_(std::move(code)) {}
    const std::string& code() const noexcept { return code_; }

private:
    std::string code_;
};

class InfeasibleError : public SolverError
{
public:
    explicit InfeasibleError(const std::string& what) : SolverError("infeasible", what) {}
};

/** Input that breaks a documented precondition (not a shape error). */
class PreconditionError : public std::invalid_argument
{
public:
    explicit PreconditionError(const std::string& what) : std::invalid_argument(what) {}
};

} // namespace flexrec
