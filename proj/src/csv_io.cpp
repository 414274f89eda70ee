#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "aumcf/core.hpp"
#include "aumcf/error.hpp"

namespace aumcf {

namespace {

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        out.push_back(trim(std::string_view(line).substr(start, comma - start)));
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    return out;
}

std::string where(std::size_t line_no) { return "line " + std::to_string(line_no) + ": "; }

double parse_double(const std::string& field, std::size_t line_no, const char* what) {
    double v = 0.0;
    const char* first = field.data();
    const char* last = field.data() + field.size();
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (field.empty() || ec != std::errc() || ptr != last) {
        const char* code = std::string_view(what) == "covariate" ? "missing_covariate" : "parse_error";
        fail_validation(code, where(line_no) + "cannot parse " + what + " '" + field + "'");
    }
    return v;
}

int parse_int(const std::string& field, std::size_t line_no, const char* what) {
    int v = 0;
    auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
    if (field.empty() || ec != std::errc() || ptr != field.data() + field.size()) {
        fail_validation("parse_error", where(line_no) + "cannot parse " + what + " '" + field + "'");
    }
    return v;
}

std::string format_number(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

}  // namespace

RecordTable read_records_csv(std::istream& in) {
    std::string line;
    std::size_t line_no = 0;
    std::vector<std::string> header;
    while (std::getline(in, line)) {
        ++line_no;
        if (!trim(line).empty()) {
            header = split_fields(line);
            break;
        }
    }
    const std::vector<std::string> required{"id", "time", "status", "arm"};
    if (header.size() < required.size() || !std::equal(required.begin(), required.end(), header.begin())) {
        fail_validation("bad_header", "CSV header must start with id,time,status,arm");
    }
    std::size_t first_cov = 4;
    const bool has_type = header.size() > 4 && header[4] == "event_type";
    if (has_type) first_cov = 5;

    RecordTable table;
    table.covariate_names.assign(header.begin() + static_cast<std::ptrdiff_t>(first_cov), header.end());

    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const auto f = split_fields(line);
        if (f.size() != header.size()) {
            fail_validation("parse_error", where(line_no) + "expected " + std::to_string(header.size()) +
                                               " fields, found " + std::to_string(f.size()));
        }
        EventRecord r;
        r.subject_id = f[0];
        if (r.subject_id.empty()) fail_validation("parse_error", where(line_no) + "empty subject id");
        r.time = parse_double(f[1], line_no, "time");
        const int status = parse_int(f[2], line_no, "status");
        if (status < 0 || status > 2) {
            fail_validation("unknown_status", where(line_no) + "unknown status code " + f[2]);
        }
        r.status = static_cast<Status>(status);
        r.arm = parse_int(f[3], line_no, "arm");
        if (has_type && !f[4].empty()) r.event_type = parse_int(f[4], line_no, "event_type");
        for (std::size_t k = first_cov; k < f.size(); ++k) {
            r.covariates.push_back(parse_double(f[k], line_no, "covariate"));
        }
        table.records.push_back(std::move(r));
    }
    return table;
}

RecordTable read_records_csv_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail_validation("io_error", "cannot open input file " + path);
    return read_records_csv(in);
}

void write_records_csv(std::ostream& out, const RecordTable& table) {
    const bool has_type = std::any_of(table.records.begin(), table.records.end(),
                                      [](const EventRecord& r) { return r.event_type.has_value(); });
    out << "id,time,status,arm";
    if (has_type) out << ",event_type";
    for (const auto& name : table.covariate_names) out << ',' << name;
    out << '\n';
    for (const auto& r : table.records) {
        out << r.subject_id << ',' << format_number(r.time) << ',' << static_cast<int>(r.status) << ',' << r.arm;
        if (has_type) {
            out << ',';
            if (r.event_type) out << *r.event_type;
        }
        for (double w : r.covariates) out << ',' << format_number(w);
        out << '\n';
    }
}

RecordTable select_covariates(const RecordTable& table, const std::vector<std::string>& names) {
    std::vector<std::size_t> idx;
    for (const auto& name : names) {
        auto it = std::find(table.covariate_names.begin(), table.covariate_names.end(), name);
        if (it == table.covariate_names.end()) {
            fail_validation("unknown_covariate", "no covariate column named '" + name + "'");
        }
        idx.push_back(static_cast<std::size_t>(it - table.covariate_names.begin()));
    }
    RecordTable out;
    out.covariate_names = names;
    out.records.reserve(table.records.size());
    for (const auto& r : table.records) {
        EventRecord copy = r;
        copy.covariates.clear();
        for (auto k : idx) copy.covariates.push_back(r.covariates[k]);
        out.records.push_back(std::move(copy));
    }
    return out;
}

}  // namespace aumcf
