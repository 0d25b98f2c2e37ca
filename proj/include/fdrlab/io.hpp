#pragma once

#include <charconv>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "fdrlab/batch.hpp"
#include "fdrlab/montecarlo.hpp"
#include "fdrlab/procedures.hpp"
#include "fdrlab/theory.hpp"

namespace fdrlab {

// Shortest round-trip decimal form, locale-independent.
inline std::string format_double(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) {
        while (!field.empty() && (field.back() == '\r' || field.back() == ' '))
            field.pop_back();
        while (!field.empty() && field.front() == ' ') field.erase(field.begin());
        fields.push_back(field);
    }
    if (!line.empty() && line.back() == ',') fields.push_back("");
    return fields;
}

inline double parse_double(const std::string& s, const char* what) {
    std::size_t pos = 0;
    double v;
    try {
        v = std::stod(s, &pos);
    } catch (const std::exception&) {
        throw std::invalid_argument(std::string("csv: bad ") + what + " value '" + s + "'");
    }
    if (pos != s.size())
        throw std::invalid_argument(std::string("csv: bad ") + what + " value '" + s + "'");
    return v;
}

}  // namespace detail

// Reads the shared input format: CSV with header, column `p` in [0,1] and
// optional column `is_null` in {0,1}. Row order defines original indices.
inline PValueBatch read_pvalue_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line))
        return {};  // empty file: empty batch
    auto header = detail::split_csv_line(line);
    int p_col = -1, null_col = -1;
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (header[i] == "p") p_col = static_cast<int>(i);
        if (header[i] == "is_null") null_col = static_cast<int>(i);
    }
    if (p_col < 0) throw std::invalid_argument("csv: missing required column 'p'");
    PValueBatch batch;
    while (std::getline(in, line)) {
        if (line.empty() || line == "\r") continue;
        auto fields = detail::split_csv_line(line);
        if (fields.size() <= static_cast<std::size_t>(p_col))
            throw std::invalid_argument("csv: row with too few fields");
        double p = detail::parse_double(fields[static_cast<std::size_t>(p_col)], "p");
        if (!(p >= 0.0 && p <= 1.0))
            throw std::invalid_argument("csv: p-value outside [0,1]");
        batch.values.push_back(p);
        if (null_col >= 0) {
            if (fields.size() <= static_cast<std::size_t>(null_col))
                throw std::invalid_argument("csv: row missing is_null field");
            const std::string& s = fields[static_cast<std::size_t>(null_col)];
            if (s == "1")
                batch.labels.push_back(Label::Null);
            else if (s == "0")
                batch.labels.push_back(Label::Alternative);
            else
                throw std::invalid_argument("csv: is_null must be 0 or 1, got '" + s + "'");
        }
    }
    batch.validate();
    return batch;
}

inline PValueBatch read_pvalue_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open input file: " + path);
    return read_pvalue_csv(in);
}

// Per-hypothesis rejection table plus a summary line.
inline void write_rejection_csv(std::ostream& out, const PValueBatch& batch,
                                const RejectionOutcome& outcome) {
    out << "index,p,rejected\n";
    std::vector<char> rejected(batch.size(), 0);
    for (std::size_t idx : outcome.rejected) rejected[idx] = 1;
    for (std::size_t i = 0; i < batch.size(); ++i)
        out << i << ',' << format_double(batch.values[i]) << ','
            << static_cast<int>(rejected[i]) << '\n';
    out << "# R=" << outcome.r << " threshold=" << format_double(outcome.threshold)
        << " q_used=" << format_double(outcome.q_nominal);
    if (outcome.s) {
        out << " S=" << *outcome.s << " pi1=" << format_double(*outcome.pi1);
        if (outcome.pi2) out << " pi2=" << format_double(*outcome.pi2);
        out << " pi3=" << format_double(*outcome.pi3);
    }
    out << '\n';
}

inline void write_figure_csv(std::ostream& out, const char* header,
                             const std::vector<FigureRow>& rows) {
    out << header << '\n';
    out.precision(10);
    for (const auto& row : rows)
        out << row[0] << ',' << row[1] << ',' << row[2] << '\n';
}

inline nlohmann::ordered_json summary_to_json(const AsymptoticSummary& s) {
    nlohmann::ordered_json j;
    j["rho"] = s.rho;
    j["rho_lower"] = s.rho_lower;
    j["rho_upper"] = s.rho_upper;
    j["unique"] = s.unique;
    j["borderline"] = s.borderline;
    j["applicable"] = s.applicable;
    if (s.fdr_limit) j["fdr_limit"] = *s.fdr_limit;
    if (s.pi2_limit) j["pi2_limit"] = *s.pi2_limit;
    if (s.pi3_complement_limit) j["pi3_complement_limit"] = *s.pi3_complement_limit;
    return j;
}

inline nlohmann::ordered_json bounds_to_json(const BhsBounds& b) {
    nlohmann::ordered_json j;
    j["kappa_x"] = b.kappa_x;
    j["q_limit"] = b.q_limit;
    j["fdr_lo"] = b.fdr_lo;
    j["fdr_hi"] = b.fdr_hi;
    j["power_lo"] = b.power_lo;
    j["power_hi"] = b.power_hi;
    j["applicable"] = b.applicable;
    if (!b.diagnostic.empty()) j["diagnostic"] = b.diagnostic;
    return j;
}

inline nlohmann::ordered_json report_to_json(const SimReport& report) {
    nlohmann::ordered_json j;
    nlohmann::ordered_json cfg;
    cfg["gamma"] = report.config.mixture.gamma;
    cfg["model"] = format_model(report.config.mixture.alt);
    cfg["m"] = report.config.mixture.m;
    switch (report.config.procedure) {
        case SimConfig::Procedure::BH: cfg["procedure"] = "bh"; break;
        case SimConfig::Procedure::BHStrict: cfg["procedure"] = "bh-strict"; break;
        case SimConfig::Procedure::BHS: cfg["procedure"] = "bhs"; break;
    }
    if (report.config.procedure == SimConfig::Procedure::BHS) {
        cfg["delta"] = report.config.delta;
        cfg["x"] = report.config.x;
    } else {
        cfg["q"] = report.config.q;
    }
    cfg["k_max"] = report.config.k_max;
    j["config"] = cfg;
    nlohmann::ordered_json stats = nlohmann::ordered_json::array();
    for (const auto& s : report.statistics) {
        nlohmann::ordered_json js;
        js["name"] = s.name;
        js["mean"] = s.mean();
        js["se"] = s.se;
        js["moments"] = s.moments;
        stats.push_back(js);
    }
    j["statistics"] = stats;
    j["reps"] = report.reps;
    j["seed"] = report.seed;
    j["wall_time"] = report.wall_time_s;
    return j;
}

}  // namespace fdrlab
