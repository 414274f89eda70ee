#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace aumcf {

// ---------------------------------------------------------------------------
// Record-level data (wire format)
// ---------------------------------------------------------------------------

enum class Status : int { Censor = 0, Event = 1, Death = 2 };

/// One row of the long-format input: an event, a death, or an end of follow-up.
struct EventRecord {
    std::string subject_id;
    double time = 0.0;
    Status status = Status::Censor;
    int arm = 1;
    std::optional<int> event_type;
    std::vector<double> covariates;

    bool operator==(const EventRecord&) const = default;
};

/// Parsed CSV: records plus the names of the covariate columns they carry.
struct RecordTable {
    std::vector<std::string> covariate_names;
    std::vector<EventRecord> records;
};

// ---------------------------------------------------------------------------
// Subject-level data
// ---------------------------------------------------------------------------

struct Event {
    double time = 0.0;
    std::optional<int> type;

    bool operator==(const Event&) const = default;
};

/// Follow-up of one subject: X = min(D, C), delta = 1{D <= C}, and the
/// observed recurrent-event times on [0, X].
struct SubjectHistory {
    std::string id;
    double follow_up = 0.0;
    bool terminal = false;
    std::vector<Event> events;  // ascending by time
    std::vector<double> covariates;

    bool operator==(const SubjectHistory&) const = default;
};

/// Subjects randomized to one arm. Immutable once constructed.
class ArmDataset {
public:
    ArmDataset() = default;
    /// Throws Error(Validation) when empty, when a subject violates
    /// 0 <= t <= X ordering, or when covariate lengths disagree.
    ArmDataset(int label, std::vector<SubjectHistory> subjects);

    int label() const noexcept { return label_; }
    const std::vector<SubjectHistory>& subjects() const noexcept { return subjects_; }
    std::size_t size() const noexcept { return subjects_.size(); }
    std::size_t covariate_dim() const noexcept { return covariate_dim_; }
    double max_follow_up() const noexcept;

    bool operator==(const ArmDataset&) const = default;

private:
    int label_ = 1;
    std::vector<SubjectHistory> subjects_;
    std::size_t covariate_dim_ = 0;
};

/// Two arms observed over [0, tau].
class StudyDataset {
public:
    StudyDataset(ArmDataset arm1, ArmDataset arm2, double tau);

    const ArmDataset& arm1() const noexcept { return arm1_; }
    const ArmDataset& arm2() const noexcept { return arm2_; }
    const ArmDataset& arm(int j) const { return j == 1 ? arm1_ : arm2_; }
    double tau() const noexcept { return tau_; }
    std::size_t n() const noexcept { return arm1_.size() + arm2_.size(); }
    double rho(int j) const { return static_cast<double>(arm(j).size()) / static_cast<double>(n()); }

    bool operator==(const StudyDataset&) const = default;

private:
    ArmDataset arm1_;
    ArmDataset arm2_;
    double tau_;
};

// ---------------------------------------------------------------------------
// Ingestion
// ---------------------------------------------------------------------------

/// Groups records by arm and subject. The result depends only on the multiset
/// of records: subjects are ordered by id and events by (time, type).
/// Returns the arms present, ordered by label.
std::vector<ArmDataset> ingest_arms(const std::vector<EventRecord>& records);

/// As ingest_arms, but both arms 1 and 2 must be present.
StudyDataset ingest_records(const std::vector<EventRecord>& records, double tau);

/// Inverse of ingestion: one Event row per event and one Censor/Death row per subject.
std::vector<EventRecord> to_records(const ArmDataset& arm);
std::vector<EventRecord> to_records(const StudyDataset& study);

enum class TruncationStatus { Ok, Warn };

struct TruncationReport {
    TruncationStatus status = TruncationStatus::Ok;
    std::vector<std::string> messages;
};

/// Checks that each arm has a subject followed to tau (P(X >= tau) > 0).
/// In strict mode a failure throws Error(Validation, "tau_not_identifiable").
TruncationReport validate_truncation(const StudyDataset& study, bool strict = false);
TruncationReport validate_truncation(const ArmDataset& arm, double tau, bool strict = false);

// ---------------------------------------------------------------------------
// CSV wire format: id,time,status,arm[,event_type][,w1,...,wp]
// ---------------------------------------------------------------------------

RecordTable read_records_csv(std::istream& in);
RecordTable read_records_csv_file(const std::string& path);
void write_records_csv(std::ostream& out, const RecordTable& table);

/// Keeps only the named covariate columns, in the order given.
RecordTable select_covariates(const RecordTable& table, const std::vector<std::string>& names);

}  // namespace aumcf
