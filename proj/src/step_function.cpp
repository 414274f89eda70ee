#include "aumcf/step_function.hpp"

#include <algorithm>
#include <ostream>
#include <stdexcept>

namespace aumcf {

StepFunction::StepFunction(double initial_value, std::vector<double> jump_times, std::vector<double> values)
    : initial_(initial_value), times_(std::move(jump_times)), values_(std::move(values)) {
    if (times_.size() != values_.size()) {
        throw std::invalid_argument("StepFunction: jump_times and values differ in length");
    }
    for (std::size_t k = 0; k < times_.size(); ++k) {
        if (times_[k] < 0.0 || (k > 0 && !(times_[k] > times_[k - 1]))) {
            throw std::invalid_argument("StepFunction: jump times must be nonnegative and strictly ascending");
        }
    }
}

double StepFunction::operator()(double t) const {
    // index of first jump strictly after t
    const auto it = std::upper_bound(times_.begin(), times_.end(), t);
    if (it == times_.begin()) return initial_;
    return values_[static_cast<std::size_t>(it - times_.begin()) - 1];
}

double StepFunction::left_limit(double t) const {
    const auto it = std::lower_bound(times_.begin(), times_.end(), t);
    if (it == times_.begin()) return initial_;
    return values_[static_cast<std::size_t>(it - times_.begin()) - 1];
}

double area_under_step(const StepFunction& f, double tau) {
    if (tau <= 0.0) return 0.0;
    const auto& t = f.jump_times();
    const auto& v = f.values();
    double area = 0.0;
    double left = 0.0;
    double level = f.initial_value();
    for (std::size_t k = 0; k < t.size() && t[k] < tau; ++k) {
        area += level * (t[k] - left);
        left = t[k];
        level = v[k];
    }
    area += level * (tau - left);
    return area;
}

void write_step_csv(std::ostream& out, const StepFunction& f) {
    const auto old_precision = out.precision(17);
    out << "time,value\n";
    const auto& t = f.jump_times();
    const auto& v = f.values();
    if (t.empty() || t.front() > 0.0) out << 0 << ',' << f.initial_value() << '\n';
    for (std::size_t k = 0; k < t.size(); ++k) out << t[k] << ',' << v[k] << '\n';
    out.precision(old_precision);
}

}  // namespace aumcf
