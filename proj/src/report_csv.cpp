#include <cerrno>
#include <cstdlib>
#include <istream>
#include <ostream>
#include <sstream>

#include <fmt/format.h>

#include "padefreq/errors.hpp"
#include "padefreq/harness.hpp"

namespace padefreq {

namespace {

double parse_double(const std::string& field, int line) {
    char* end = nullptr;
    errno = 0;
    const double v = std::strtod(field.c_str(), &end);
    if (field.empty() || *end != '\0' || errno == ERANGE) {
        throw InvalidArgument(fmt::format("CSV line {}: bad number '{}'", line, field));
    }
    return v;
}

long long parse_integer(const std::string& field, int line) {
    char* end = nullptr;
    errno = 0;
    const long long v = std::strtoll(field.c_str(), &end, 10);
    if (field.empty() || *end != '\0' || errno == ERANGE) {
        throw InvalidArgument(fmt::format("CSV line {}: bad integer '{}'", line, field));
    }
    return v;
}

std::uint64_t parse_unsigned(const std::string& field, int line) {
    char* end = nullptr;
    errno = 0;
    const unsigned long long v = std::strtoull(field.c_str(), &end, 10);
    if (field.empty() || *end != '\0' || errno == ERANGE) {
        throw InvalidArgument(fmt::format("CSV line {}: bad seed '{}'", line, field));
    }
    return v;
}

} // namespace

std::string csv_header() {
    return "sweep,grid_value,estimator,iteration,trials,mse,crlb,mse_over_crlb,failures,seed";
}

std::string to_csv_line(const SweepRow& r) {
    return fmt::format("{},{:.9g},{},{},{},{:.9g},{:.9g},{:.9g},{},{}", r.sweep, r.grid_value, to_string(r.estimator), r.iteration, r.trials, r.mse, r.crlb, r.mse_over_crlb, r.failures, r.seed);
}

void write_csv(std::ostream& out, const SweepReport& report) {
    out << csv_header() << '\n';
    for (const SweepRow& row : report.rows) {
        out << to_csv_line(row) << '\n';
    }
}

std::vector<SweepRow> read_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line != csv_header()) {
        throw InvalidArgument("CSV: missing or unexpected header");
    }
    std::vector<SweepRow> rows;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) {
            continue;
        }
        std::vector<std::string> fields;
        std::stringstream ss(line);
        std::string field;
        while (std::getline(ss, field, ',')) {
            fields.push_back(field);
        }
        if (fields.size() != 10) {
            throw InvalidArgument(fmt::format("CSV line {}: expected 10 fields, got {}", line_no, fields.size()));
        }
        SweepRow r;
        r.sweep = fields[0];
        r.grid_value = parse_double(fields[1], line_no);
        r.estimator = parse_variant(fields[2]);
        r.iteration = static_cast<int>(parse_integer(fields[3], line_no));
        r.trials = static_cast<int>(parse_integer(fields[4], line_no));
        r.mse = parse_double(fields[5], line_no);
        r.crlb = parse_double(fields[6], line_no);
        r.mse_over_crlb = parse_double(fields[7], line_no);
        r.failures = static_cast<int>(parse_integer(fields[8], line_no));
        r.seed = parse_unsigned(fields[9], line_no);
        rows.push_back(std::move(r));
    }
    return rows;
}

} // namespace padefreq
