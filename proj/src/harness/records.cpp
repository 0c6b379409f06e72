#include "agn/harness/records.hpp"

#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>

#include "agn/error.hpp"
#include "agn/network_io.hpp"

#ifndef AGN_VERSION_HASH
#define AGN_VERSION_HASH "unknown"
#endif

namespace agn {

using nlohmann::json;

std::string artifact_version() { return AGN_VERSION_HASH; }

std::string header_comment(std::uint64_t seed) {
    return "agn version=" + artifact_version() + " seed=" + std::to_string(seed);
}

namespace {

// JSON has no NaN or infinity; those become null.
json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

std::string utc_timestamp() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

}  // namespace

json result_to_json(const ExperimentConfig& config, const TrainOutput& output) {
    const ExperimentResult& r = output.result;
    const TheoryTrace& t = output.trace;
    json trace = {{"pathwise_checks", t.pathwise_checks}, {"steps_checked", t.steps_checked}};
    if (!t.rows.empty()) {
        trace["final_h"] = number_or_null(t.rows.back().h);
        trace["final_g"] = number_or_null(t.rows.back().g);
    }
    trace["min_key_identity_slack"] = number_or_null(t.min_key_identity_slack);
    trace["min_correlation_growth_slack"] = number_or_null(t.min_correlation_growth_slack);
    trace["min_norm_growth_slack"] = number_or_null(t.min_norm_growth_slack);
    trace["min_cauchy_schwarz_slack"] = number_or_null(t.min_cauchy_schwarz_slack);

    json result = {{"best_iterate", r.best_iterate},
                   {"test_error", r.test_error},
                   {"test_accuracy", 1.0 - r.test_error},
                   {"surrogate_risk_at_best", r.surrogate_risk_at_best},
                   {"markov_bound", r.markov_bound},
                   {"opt_lin", number_or_null(r.opt_lin)},
                   {"bayes_risk", number_or_null(r.bayes_risk)},
                   {"steps", r.steps}};
    return {{"format", "agn-result"},
            {"version", kResultVersion},
            {"artifact_version", artifact_version()},
            {"seed", r.seed},
            {"config", to_json(config)},
            {"result", result},
            {"trace_summary", trace},
            {"timing", {{"wall_time", r.wall_time}, {"created", utc_timestamp()}}}};
}

json without_timing(json record) {
    record.erase("timing");
    return record;
}

void validate_result_json(const json& j) {
    auto need = [&](const json& obj, const char* key, const std::string& where) -> const json& {
        if (!obj.is_object() || !obj.contains(key)) throw ParseError(where + ": missing '" + key + "'");
        return obj.at(key);
    };
    if (need(j, "format", "result") != "agn-result") throw ParseError("result: not an agn result record");
    if (need(j, "version", "result") != kResultVersion) throw ParseError("result: unsupported version");
    need(j, "artifact_version", "result");
    if (!need(j, "seed", "result").is_number_unsigned()) throw ParseError("result.seed: expected an integer");
    experiment_from_json(need(j, "config", "result"));
    const json& r = need(j, "result", "result");
    for (const char* key : {"test_error", "test_accuracy", "surrogate_risk_at_best", "markov_bound"}) {
        if (!need(r, key, "result.result").is_number()) throw ParseError(std::string("result.result.") + key + ": expected a number");
    }
    const double err = r.at("test_error").get<double>();
    if (!(err >= 0.0 && err <= 1.0)) throw ParseError("result.result.test_error: outside [0,1]");
    if (!need(r, "best_iterate", "result.result").is_number_unsigned()) {
        throw ParseError("result.result.best_iterate: expected an integer");
    }
    need(j, "trace_summary", "result");
}

void write_json_file(const json& j, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    out << j.dump(2) << '\n';
    if (!out) throw IoError("failed writing " + path.string());
}

RunFiles write_run(const std::filesystem::path& dir, const std::string& stem, const ExperimentConfig& config,
                   const TrainOutput& output) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
    RunFiles files{dir / (stem + ".json"), dir / (stem + "_trace.csv"), dir / (stem + "_validation.csv"),
                   dir / (stem + "_best.agnw")};
    const std::string comment = header_comment(output.result.seed);
    write_trace_csv(output.trace, files.trace, comment);
    write_validation_csv(output.validation_curve, files.validation, comment);
    save_network(output.best_params, files.checkpoint);
    write_json_file(result_to_json(config, output), files.result);
    return files;
}

}  // namespace agn
