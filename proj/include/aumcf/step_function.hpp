#pragma once

#include <iosfwd>
#include <vector>

namespace aumcf {

/// Right-continuous piecewise-constant function on [0, inf).
///
/// Takes `initial_value` on [0, t_1) and `values[k]` on [t_k, t_{k+1}); beyond
/// the last jump the last value is held (flat extrapolation).
class StepFunction {
public:
    StepFunction() = default;
    /// `jump_times` must be strictly ascending, nonnegative, and the same
    /// length as `values`; throws std::invalid_argument otherwise.
    StepFunction(double initial_value, std::vector<double> jump_times, std::vector<double> values);

    static StepFunction constant(double value) { return StepFunction(value, {}, {}); }

    double initial_value() const noexcept { return initial_; }
    const std::vector<double>& jump_times() const noexcept { return times_; }
    const std::vector<double>& values() const noexcept { return values_; }
    bool empty() const noexcept { return times_.empty(); }

    double operator()(double t) const;
    double left_limit(double t) const;

    bool operator==(const StepFunction&) const = default;

private:
    double initial_ = 0.0;
    std::vector<double> times_;
    std::vector<double> values_;
};

/// Exact integral of `f` over [0, tau].
double area_under_step(const StepFunction& f, double tau);

/// `time,value` rows starting at t = 0, then one row per jump.
void write_step_csv(std::ostream& out, const StepFunction& f);

}  // namespace aumcf
