#include "gew/model.hpp"

#include "gew/errors.hpp"

#include <cmath>
#include <limits>

namespace gew
{

namespace
{

void check_weibull(const WeibullParams& w)
{
    if (!(w.alpha > 0.0) || !(w.beta > 0.0) || !std::isfinite(w.alpha) || !std::isfinite(w.beta))
        throw DomainError("Weibull parameters must be positive and finite");
}

void check_time(double x)
{
    if (!(x >= 0.0))
        throw DomainError("time must be non-negative, got " + std::to_string(x));
}

// alpha * x^beta evaluated as exp(ln alpha + beta ln x); x > 0.
double cumulative_hazard(double log_alpha, double beta, double x)
{
    return std::exp(log_alpha + beta * std::log(x));
}

double log_pdf_from_log_alpha(double log_alpha, double beta, double x)
{
    check_time(x);
    if (x == 0.0)
    {
        if (beta < 1.0)
            throw DomainError("density is unbounded at x = 0 when beta < 1");
        if (beta > 1.0)
            return -std::numeric_limits<double>::infinity();
        return log_alpha;
    }
    const double lx = std::log(x);
    return log_alpha + std::log(beta) + (beta - 1.0) * lx - std::exp(log_alpha + beta * lx);
}

double log_reliability_from_log_alpha(double log_alpha, double beta, double x)
{
    check_time(x);
    if (x == 0.0)
        return 0.0;
    return -cumulative_hazard(log_alpha, beta, x);
}

} // namespace

std::string_view to_string(VTransform t)
{
    switch (t)
    {
    case VTransform::Identity: return "identity";
    case VTransform::Log: return "log";
    case VTransform::Reciprocal: return "reciprocal";
    }
    return "?";
}

VTransform parse_vtransform(std::string_view name)
{
    if (name == "identity")
        return VTransform::Identity;
    if (name == "log" || name == "ln")
        return VTransform::Log;
    if (name == "reciprocal" || name == "inverse")
        return VTransform::Reciprocal;
    throw ValidationError(ValidationKind::BadStress, "unknown V transform '" + std::string(name) + "'");
}

double apply_vtransform(VTransform t, double nonthermal)
{
    switch (t)
    {
    case VTransform::Identity: return nonthermal;
    case VTransform::Log:
        if (!(nonthermal > 0.0))
            throw ValidationError(ValidationKind::BadStress, "log transform needs a positive stress");
        return std::log(nonthermal);
    case VTransform::Reciprocal:
        if (nonthermal == 0.0)
            throw ValidationError(ValidationKind::BadStress, "reciprocal transform needs a non-zero stress");
        return 1.0 / nonthermal;
    }
    return nonthermal;
}

StressLevel StressLevel::make(double temperature, double nonthermal, VTransform t)
{
    if (!(temperature > 0.0) || !std::isfinite(temperature))
        throw ValidationError(ValidationKind::BadStress, "temperature must be positive (kelvin)");
    if (!std::isfinite(nonthermal))
        throw ValidationError(ValidationKind::BadStress, "non-thermal stress must be finite");
    return {temperature, nonthermal, apply_vtransform(t, nonthermal)};
}

std::string_view to_string(Param p)
{
    switch (p)
    {
    case Param::Theta1: return "theta1";
    case Param::Theta2: return "theta2";
    case Param::Theta3: return "theta3";
    case Param::Theta4: return "theta4";
    case Param::Beta: return "beta";
    }
    return "?";
}

double GewParams::get(Param p) const
{
    switch (p)
    {
    case Param::Theta1: return theta1;
    case Param::Theta2: return theta2;
    case Param::Theta3: return theta3;
    case Param::Theta4: return theta4;
    case Param::Beta: return beta;
    }
    return 0.0;
}

void GewParams::set(Param p, double value)
{
    switch (p)
    {
    case Param::Theta1: theta1 = value; break;
    case Param::Theta2: theta2 = value; break;
    case Param::Theta3: theta3 = value; break;
    case Param::Theta4: theta4 = value; break;
    case Param::Beta: beta = value; break;
    }
}

double eyring_coefficient(Param p, const StressLevel& s)
{
    switch (p)
    {
    case Param::Theta1: return 1.0;
    case Param::Theta2: return 1.0 / s.temperature;
    case Param::Theta3: return s.v;
    case Param::Theta4: return s.v / s.temperature;
    case Param::Beta: return 0.0;
    }
    return 0.0;
}

double eyring_log_alpha(const GewParams& p, const StressLevel& s)
{
    if (!(s.temperature > 0.0))
        throw DomainError("temperature must be positive (kelvin)");
    const double T = s.temperature;
    return std::log(T) - p.theta1 - p.theta2 / T - p.theta3 * s.v - p.theta4 * s.v / T;
}

double eyring_alpha(const GewParams& p, const StressLevel& s)
{
    const double log_alpha = eyring_log_alpha(p, s);
    const double alpha = std::exp(log_alpha);
    if (!std::isfinite(alpha) || alpha <= 0.0)
        throw OverflowError("Eyring scale is not representable, ln(alpha) = " + std::to_string(log_alpha),
                            log_alpha);
    return alpha;
}

double weibull_log_pdf(const WeibullParams& w, double x)
{
    check_weibull(w);
    return log_pdf_from_log_alpha(std::log(w.alpha), w.beta, x);
}

double weibull_log_reliability(const WeibullParams& w, double x)
{
    check_weibull(w);
    return log_reliability_from_log_alpha(std::log(w.alpha), w.beta, x);
}

double weibull_inverse_reliability(const WeibullParams& w, double u)
{
    check_weibull(w);
    if (!(u > 0.0 && u <= 1.0))
        throw DomainError("reliability level must lie in (0, 1]");
    return std::pow(-std::log(u) / w.alpha, 1.0 / w.beta);
}

double gew_log_pdf(const GewParams& p, const StressLevel& s, double x)
{
    if (!(p.beta > 0.0))
        throw DomainError("beta must be positive");
    return log_pdf_from_log_alpha(eyring_log_alpha(p, s), p.beta, x);
}

double gew_log_reliability(const GewParams& p, const StressLevel& s, double tau)
{
    if (!(p.beta > 0.0))
        throw DomainError("beta must be positive");
    return log_reliability_from_log_alpha(eyring_log_alpha(p, s), p.beta, tau);
}

} // namespace gew
