#include "aumcf/core.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "aumcf/error.hpp"

namespace aumcf {

namespace {

std::string fmt_time(double t) {
    std::ostringstream os;
    os.precision(17);
    os << t;
    return os.str();
}

void check_subject(const SubjectHistory& s) {
    if (!std::isfinite(s.follow_up) || s.follow_up < 0.0) {
        fail_validation("invalid_time", "subject " + s.id + ": follow-up time must be finite and nonnegative");
    }
    double prev = 0.0;
    for (const auto& e : s.events) {
        if (!std::isfinite(e.time) || e.time < 0.0) {
            fail_validation("invalid_time", "subject " + s.id + ": event time must be finite and nonnegative");
        }
        if (e.time > s.follow_up) {
            fail_validation("event_after_follow_up", "subject " + s.id + ": event at " + fmt_time(e.time) +
                                                         " exceeds follow-up " + fmt_time(s.follow_up));
        }
        if (e.time < prev) {
            fail_validation("unsorted_events", "subject " + s.id + ": event times must be ascending");
        }
        prev = e.time;
    }
    for (double w : s.covariates) {
        if (!std::isfinite(w)) {
            fail_validation("missing_covariate", "subject " + s.id + ": covariates must be fully observed");
        }
    }
}

bool event_less(const Event& a, const Event& b) {
    if (a.time != b.time) return a.time < b.time;
    return a.type.value_or(-1) < b.type.value_or(-1);
}

}  // namespace

ArmDataset::ArmDataset(int label, std::vector<SubjectHistory> subjects)
    : label_(label), subjects_(std::move(subjects)) {
    if (subjects_.empty()) {
        fail_validation("empty_arm", "arm " + std::to_string(label) + " has no subjects");
    }
    covariate_dim_ = subjects_.front().covariates.size();
    for (const auto& s : subjects_) {
        check_subject(s);
        if (s.covariates.size() != covariate_dim_) {
            fail_validation("covariate_dimension",
                            "arm " + std::to_string(label) + ": inconsistent covariate dimensions");
        }
    }
}

double ArmDataset::max_follow_up() const noexcept {
    double m = 0.0;
    for (const auto& s : subjects_) m = std::max(m, s.follow_up);
    return m;
}

StudyDataset::StudyDataset(ArmDataset arm1, ArmDataset arm2, double tau)
    : arm1_(std::move(arm1)), arm2_(std::move(arm2)), tau_(tau) {
    if (!(tau_ > 0.0) || !std::isfinite(tau_)) {
        fail_validation("invalid_tau", "tau must be a positive finite number");
    }
    if (arm1_.size() == 0 || arm2_.size() == 0) {
        fail_validation("empty_arm", "both arms must contain subjects");
    }
    if (arm1_.covariate_dim() != arm2_.covariate_dim()) {
        fail_validation("covariate_dimension", "covariate dimension differs between arms");
    }
}

std::vector<ArmDataset> ingest_arms(const std::vector<EventRecord>& records) {
    if (records.empty()) fail_validation("no_records", "no records supplied");

    struct Pending {
        int arm = 0;
        std::vector<Event> events;
        std::vector<const EventRecord*> closing;
        std::optional<std::vector<double>> covariates;
    };
    std::map<std::string, Pending> by_subject;

    std::optional<std::size_t> dim;
    for (const auto& r : records) {
        const int code = static_cast<int>(r.status);
        if (code < 0 || code > 2) {
            fail_validation("unknown_status", "subject " + r.subject_id + ": unknown status code " +
                                                  std::to_string(code));
        }
        if (r.arm != 1 && r.arm != 2) {
            fail_validation("unknown_arm", "subject " + r.subject_id + ": arm must be 1 or 2");
        }
        if (!std::isfinite(r.time) || r.time < 0.0) {
            fail_validation("invalid_time", "subject " + r.subject_id + ": time must be finite and nonnegative");
        }
        if (!dim) dim = r.covariates.size();
        if (r.covariates.size() != *dim) {
            fail_validation("covariate_dimension", "subject " + r.subject_id + ": inconsistent covariate dimensions");
        }

        auto [it, inserted] = by_subject.try_emplace(r.subject_id);
        Pending& p = it->second;
        if (inserted) {
            p.arm = r.arm;
        } else if (p.arm != r.arm) {
            fail_validation("arm_conflict", "subject " + r.subject_id + " appears in both arms");
        }
        if (!p.covariates) {
            p.covariates = r.covariates;
        } else if (*p.covariates != r.covariates) {
            fail_validation("covariate_conflict", "subject " + r.subject_id + ": covariates differ between rows");
        }

        if (r.status == Status::Event) {
            p.events.push_back({r.time, r.event_type});
        } else {
            p.closing.push_back(&r);
        }
    }

    std::map<int, std::vector<SubjectHistory>> arms;
    for (auto& [id, p] : by_subject) {
        if (p.closing.empty()) {
            fail_validation("missing_terminal_record", "subject " + id + ": missing terminal/censor record");
        }
        if (p.closing.size() > 1) {
            fail_validation("duplicate_terminal_record", "subject " + id + ": more than one terminal/censor record");
        }
        SubjectHistory s;
        s.id = id;
        s.follow_up = p.closing.front()->time;
        s.terminal = p.closing.front()->status == Status::Death;
        s.events = std::move(p.events);
        std::sort(s.events.begin(), s.events.end(), event_less);
        s.covariates = p.covariates.value_or(std::vector<double>{});
        arms[p.arm].push_back(std::move(s));
    }

    std::vector<ArmDataset> out;
    for (auto& [label, subjects] : arms) out.emplace_back(label, std::move(subjects));
    return out;
}

StudyDataset ingest_records(const std::vector<EventRecord>& records, double tau) {
    auto arms = ingest_arms(records);
    if (arms.size() != 2) {
        fail_validation("missing_arm", "two-arm analysis requires records for arms 1 and 2");
    }
    return StudyDataset(std::move(arms[0]), std::move(arms[1]), tau);
}

std::vector<EventRecord> to_records(const ArmDataset& arm) {
    std::vector<EventRecord> out;
    for (const auto& s : arm.subjects()) {
        for (const auto& e : s.events) {
            out.push_back({s.id, e.time, Status::Event, arm.label(), e.type, s.covariates});
        }
        out.push_back({s.id, s.follow_up, s.terminal ? Status::Death : Status::Censor, arm.label(),
                       std::nullopt, s.covariates});
    }
    return out;
}

std::vector<EventRecord> to_records(const StudyDataset& study) {
    auto out = to_records(study.arm1());
    auto second = to_records(study.arm2());
    out.insert(out.end(), second.begin(), second.end());
    return out;
}

TruncationReport validate_truncation(const ArmDataset& arm, double tau, bool strict) {
    TruncationReport report;
    const double max_x = arm.max_follow_up();
    if (max_x < tau) {
        std::string msg = "arm " + std::to_string(arm.label()) + ": maximum follow-up " + fmt_time(max_x) +
                          " is below tau " + fmt_time(tau) + "; the MCF is not identifiable up to tau";
        if (strict) throw Error(ErrorKind::Validation, "tau_not_identifiable", msg);
        report.status = TruncationStatus::Warn;
        report.messages.push_back(std::move(msg));
    }
    return report;
}

TruncationReport validate_truncation(const StudyDataset& study, bool strict) {
    TruncationReport report = validate_truncation(study.arm1(), study.tau(), strict);
    TruncationReport second = validate_truncation(study.arm2(), study.tau(), strict);
    if (second.status == TruncationStatus::Warn) report.status = TruncationStatus::Warn;
    report.messages.insert(report.messages.end(), second.messages.begin(), second.messages.end());
    return report;
}

}  // namespace aumcf
