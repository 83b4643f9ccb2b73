#pragma once

#include <array>
#include <string>
#include <string_view>

namespace gew
{

/// Weibull law in the (alpha, beta) form used throughout: R(x) = exp(-alpha x^beta).
struct WeibullParams
{
    double alpha;
    double beta;
};

/// How the raw non-thermal stress S is mapped onto the Eyring covariate V.
enum class VTransform
{
    Identity,
    Log,
    Reciprocal,
};

std::string_view to_string(VTransform t);
VTransform parse_vtransform(std::string_view name);
double apply_vtransform(VTransform t, double nonthermal);

struct StressLevel
{
    double temperature = 0.0; // kelvin
    double nonthermal = 0.0;  // raw stress as measured
    double v = 0.0;           // transformed covariate

    static StressLevel make(double temperature, double nonthermal, VTransform t = VTransform::Log);
};

enum class Param
{
    Theta1 = 0,
    Theta2,
    Theta3,
    Theta4,
    Beta,
};

inline constexpr std::array<Param, 5> kAllParams{Param::Theta1, Param::Theta2, Param::Theta3,
                                                 Param::Theta4, Param::Beta};

std::string_view to_string(Param p);
inline constexpr std::size_t index(Param p) { return static_cast<std::size_t>(p); }

/// One state of the Markov chain: the four Eyring coefficients and the
/// common Weibull shape.
struct GewParams
{
    double theta1 = 0.0;
    double theta2 = 0.0;
    double theta3 = 0.0;
    double theta4 = 0.0;
    double beta = 1.0;

    double get(Param p) const;
    void set(Param p, double value);
    std::array<double, 5> to_array() const { return {theta1, theta2, theta3, theta4, beta}; }
    static GewParams from_array(const std::array<double, 5>& a) { return {a[0], a[1], a[2], a[3], a[4]}; }

    friend bool operator==(const GewParams&, const GewParams&) = default;
};

/// Coefficient multiplying theta_j inside the Eyring exponent at stress `s`:
/// 1, 1/T, V, V/T for j = 1..4.  Zero for beta.
double eyring_coefficient(Param p, const StressLevel& s);

/// ln(alpha) = ln T - theta1 - theta2/T - theta3 V - theta4 V/T.
double eyring_log_alpha(const GewParams& p, const StressLevel& s);

/// alpha = T exp(-theta1 - theta2/T - theta3 V - theta4 V/T).  Throws
/// OverflowError if the result is not finite.
double eyring_alpha(const GewParams& p, const StressLevel& s);

double weibull_log_pdf(const WeibullParams& w, double x);
double weibull_log_reliability(const WeibullParams& w, double x);

/// Inverse of the reliability function: the time x with R(x) = u.
double weibull_inverse_reliability(const WeibullParams& w, double u);

double gew_log_pdf(const GewParams& p, const StressLevel& s, double x);
double gew_log_reliability(const GewParams& p, const StressLevel& s, double tau);

} // namespace gew
