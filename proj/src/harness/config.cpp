#include "agn/harness/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "agn/error.hpp"

namespace agn {

using nlohmann::json;

namespace {

// Tracks which keys of an object were consumed so leftovers can be rejected.
class ObjectReader {
public:
    ObjectReader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) throw ParseError(path_ + ": expected an object");
    }

    bool has(const std::string& key) const { return j_.contains(key); }

    const json& raw(const std::string& key) {
        seen_.insert(key);
        return j_.at(key);
    }

    template <class T>
    void read(const std::string& key, T& out) {
        if (!j_.contains(key)) return;
        seen_.insert(key);
        out = convert<T>(j_.at(key), path_ + "." + key);
    }

    template <class T>
    void read(const std::string& key, std::optional<T>& out) {
        if (!j_.contains(key)) return;
        seen_.insert(key);
        if (j_.at(key).is_null()) {
            out.reset();
            return;
        }
        out = convert<T>(j_.at(key), path_ + "." + key);
    }

    std::string sub(const std::string& key) const { return path_ + "." + key; }

    void finish() const {
        for (auto it = j_.begin(); it != j_.end(); ++it) {
            if (!seen_.count(it.key())) throw ParseError(path_ + ": unknown key '" + it.key() + "'");
        }
    }

private:
    template <class T>
    static T convert(const json& v, const std::string& where) {
        if constexpr (std::is_same_v<T, bool>) {
            if (!v.is_boolean()) throw ParseError(where + ": expected a boolean");
            return v.get<bool>();
        } else if constexpr (std::is_same_v<T, std::string>) {
            if (!v.is_string()) throw ParseError(where + ": expected a string");
            return v.get<std::string>();
        } else if constexpr (std::is_integral_v<T>) {
            if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() && v.get<long long>() < 0)) {
                throw ParseError(where + ": expected a nonnegative integer");
            }
            return v.get<T>();
        } else if constexpr (std::is_same_v<T, std::vector<double>>) {
            if (!v.is_array()) throw ParseError(where + ": expected an array of numbers");
            std::vector<double> out;
            for (const json& e : v) {
                if (!e.is_number()) throw ParseError(where + ": expected an array of numbers");
                out.push_back(e.get<double>());
            }
            return out;
        } else {
            if (!v.is_number()) throw ParseError(where + ": expected a number");
            return v.get<T>();
        }
    }

    const json& j_;
    std::string path_;
    std::set<std::string> seen_;
};

template <class F>
auto reparse(const std::string& where, F&& f) {
    try {
        return f();
    } catch (const InvalidArgument& e) {
        throw ParseError(where + ": " + e.what());
    }
}

BatchMode batch_mode_from_json(const json& j, const std::string& where) {
    BatchMode mode;
    if (j.is_string()) {
        const std::string s = j.get<std::string>();
        if (s == "online") return mode;
        throw ParseError(where + ": batch_mode must be \"online\" or an object");
    }
    ObjectReader r(j, where);
    std::string kind = "minibatch";
    r.read("kind", kind);
    if (kind == "online") {
        mode.kind = BatchKind::online;
    } else if (kind == "minibatch") {
        mode.kind = BatchKind::minibatch;
    } else {
        throw ParseError(where + ".kind: unknown batch mode '" + kind + "'");
    }
    r.read("batch_size", mode.batch_size);
    r.read("epochs", mode.epochs);
    r.finish();
    return mode;
}

json batch_mode_to_json(const BatchMode& mode) {
    if (mode.kind == BatchKind::online) return "online";
    return {{"kind", "minibatch"}, {"batch_size", mode.batch_size}, {"epochs", mode.epochs}};
}

void read_distribution(const json& j, ExperimentConfig& c) {
    ObjectReader r(j, "distribution");
    DistributionSpec& d = c.distribution;
    std::string kind = std::string(to_string(d.kind));
    r.read("kind", kind);
    d.kind = reparse("distribution.kind", [&] { return distribution_kind_from_string(kind); });
    if (d.kind == DistributionKind::custom_sampler) {
        throw ParseError("distribution.kind: custom samplers cannot be configured from a file");
    }
    r.read("margin", d.margin);
    r.read("boundary", d.boundary);
    r.read("rcn_rate", d.rcn_rate);
    r.read("cluster_offset", d.cluster_offset);
    r.read("dimension", d.dimension);
    r.read("opt_lin", c.target_opt_lin);
    if (c.target_opt_lin && r.has("boundary")) {
        throw ParseError("distribution: give either 'boundary' or 'opt_lin', not both");
    }
    r.finish();
}

void read_network(const json& j, NetworkConfig& n) {
    ObjectReader r(j, "network");
    r.read("width", n.width);
    r.read("leaky_slope", n.leaky_slope);
    std::string act = std::string(to_string(n.activation));
    r.read("activation", act);
    n.activation = reparse("network.activation", [&] { return activation_from_string(act); });
    r.read("outer_magnitude", n.outer_magnitude);
    r.read("biases", n.biases);
    r.read("outer_trainable", n.outer_trainable);
    r.read("hidden_layers", n.hidden_layers);
    r.read("init_variance", n.init_variance);
    r.read("permute_outer", n.permute_outer);
    r.finish();
}

void read_train(const json& j, TrainConfig& t) {
    ObjectReader r(j, "train");
    r.read("step_size", t.step_size);
    r.read("iterations", t.iterations);
    if (r.has("batch_mode")) t.batch_mode = batch_mode_from_json(r.raw("batch_mode"), r.sub("batch_mode"));
    r.read("validation_size", t.validation_size);
    r.read("validation_cadence", t.validation_cadence);
    r.read("test_size", t.test_size);
    std::string loss = std::string(to_string(t.loss.kind));
    r.read("loss", loss);
    t.loss = reparse("train.loss", [&] { return LossSpec::from_string(loss); });
    r.read("seed", t.seed);
    r.read("diag_gamma_grid", t.diag_gamma_grid);
    r.read("theorem_mode", t.theorem_mode);
    r.finish();
}

void check_version(ObjectReader& r) {
    int version = kConfigVersion;
    r.read("version", version);
    if (version != kConfigVersion) {
        throw ParseError("unsupported config version " + std::to_string(version) + " (expected " +
                         std::to_string(kConfigVersion) + ")");
    }
}

ExperimentConfig read_experiment(ObjectReader& r, const json& j) {
    ExperimentConfig c;
    if (j.contains("distribution")) read_distribution(r.raw("distribution"), c);
    if (j.contains("network")) read_network(r.raw("network"), c.network);
    if (j.contains("train")) read_train(r.raw("train"), c.train);
    return c;
}

}  // namespace

void ExperimentConfig::resolve() {
    if (target_opt_lin) {
        const double opt = *target_opt_lin;
        switch (distribution.kind) {
            case DistributionKind::two_gaussian_adversarial:
                distribution.boundary =
                    boundary_from_opt(distribution.margin, distribution.rcn_rate, opt, distribution.cluster_offset);
                break;
            case DistributionKind::absolute_boundary:
                if (!(opt > 0.0 && opt < 0.5)) throw InfeasibleSpec("absolute-boundary OPT_lin must lie in (0, 1/2)");
                distribution.boundary = absolute_boundary_from_opt(opt);
                break;
            case DistributionKind::custom_sampler:
                throw InfeasibleSpec("an OPT_lin target needs a closed-form distribution");
        }
    }
    network.input_dim = distribution.dimension;
}

std::string to_string(SweepVariable v) {
    switch (v) {
        case SweepVariable::opt_lin: return "opt_lin";
        case SweepVariable::learning_rate: return "learning_rate";
        case SweepVariable::init_variance: return "init_variance";
        case SweepVariable::width: return "width";
        case SweepVariable::activation: return "activation";
        case SweepVariable::batch_mode: return "batch_mode";
        case SweepVariable::architecture: return "architecture";
    }
    return "unknown";
}

SweepVariable sweep_variable_from_string(const std::string& name) {
    for (SweepVariable v : {SweepVariable::opt_lin, SweepVariable::learning_rate, SweepVariable::init_variance,
                            SweepVariable::width, SweepVariable::activation, SweepVariable::batch_mode,
                            SweepVariable::architecture}) {
        if (to_string(v) == name) return v;
    }
    throw ParseError("unknown sweep variable '" + name + "'");
}

std::string to_string(Architecture a) {
    switch (a) {
        case Architecture::baseline: return "baseline";
        case Architecture::bias_trainable: return "bias_trainable";
        case Architecture::deep3: return "deep3";
    }
    return "unknown";
}

Architecture architecture_from_string(const std::string& name) {
    for (Architecture a : {Architecture::baseline, Architecture::bias_trainable, Architecture::deep3}) {
        if (to_string(a) == name) return a;
    }
    throw ParseError("unknown architecture '" + name + "'");
}

void apply_architecture(ExperimentConfig& config, Architecture arch) {
    NetworkConfig& n = config.network;
    switch (arch) {
        case Architecture::baseline:
            n.biases = false;
            n.outer_trainable = false;
            n.hidden_layers = 1;
            break;
        case Architecture::bias_trainable:
            n.biases = true;
            n.outer_trainable = true;
            n.hidden_layers = 1;
            break;
        case Architecture::deep3:
            n.biases = false;
            n.outer_trainable = true;
            n.hidden_layers = 3;
            break;
    }
}

ExperimentConfig apply_sweep_value(const ExperimentConfig& base, SweepVariable variable, const json& value) {
    ExperimentConfig c = base;
    const std::string where = "sweep value for " + to_string(variable);
    auto number = [&]() {
        if (!value.is_number()) throw ParseError(where + ": expected a number");
        return value.get<double>();
    };
    switch (variable) {
        case SweepVariable::opt_lin:
            c.target_opt_lin = number();
            break;
        case SweepVariable::learning_rate:
            c.train.step_size = number();
            break;
        case SweepVariable::init_variance:
            c.network.init_variance = number();
            break;
        case SweepVariable::width: {
            if (!value.is_number_integer() || value.get<long long>() <= 0) {
                throw ParseError(where + ": expected a positive integer");
            }
            c.network.width = value.get<std::size_t>();
            break;
        }
        case SweepVariable::activation:
            if (!value.is_string()) throw ParseError(where + ": expected an activation name");
            c.network.activation = reparse(where, [&] { return activation_from_string(value.get<std::string>()); });
            break;
        case SweepVariable::batch_mode:
            c.train.batch_mode = batch_mode_from_json(value, where);
            break;
        case SweepVariable::architecture:
            if (!value.is_string()) throw ParseError(where + ": expected an architecture name");
            apply_architecture(c, architecture_from_string(value.get<std::string>()));
            break;
    }
    c.resolve();
    return c;
}

void apply_paper_scale(ExperimentConfig& config) {
    config.network.width = 1000;
    if (config.network.biases && config.network.outer_trainable && config.network.hidden_layers == 1) {
        config.train.iterations = 100000;
    }
}

void apply_paper_scale(SweepSpec& sweep) {
    sweep.seeds = 10;
    sweep.paper_scale = true;
}

ExperimentConfig SweepSpec::cell(std::size_t index) const {
    ExperimentConfig c = apply_sweep_value(base, variable, values.at(index));
    if (paper_scale) {
        const std::size_t width = c.network.width;
        apply_paper_scale(c);
        if (variable == SweepVariable::width) c.network.width = width;
    }
    return c;
}

void SweepSpec::validate() const {
    if (values.empty()) throw InvalidArgument("sweep grid is empty");
    if (seeds < 1) throw InvalidArgument("sweep needs at least one seed");
}

ExperimentConfig experiment_from_json(const json& j) {
    ObjectReader r(j, "config");
    check_version(r);
    ExperimentConfig c = read_experiment(r, j);
    if (j.contains("sweep")) r.raw("sweep");  // tolerated so sweep files also run as single experiments
    r.finish();
    return c;
}

SweepSpec sweep_from_json(const json& j) {
    ObjectReader r(j, "config");
    check_version(r);
    SweepSpec s;
    s.base = read_experiment(r, j);
    if (!j.contains("sweep")) throw ParseError("config: missing 'sweep' section");
    ObjectReader sr(r.raw("sweep"), "sweep");
    std::string variable = "opt_lin";
    sr.read("variable", variable);
    s.variable = sweep_variable_from_string(variable);
    if (!sr.has("values") || !sr.raw("values").is_array()) throw ParseError("sweep.values: expected an array");
    for (const json& v : j.at("sweep").at("values")) s.values.push_back(v);
    sr.read("seeds", s.seeds);
    sr.read("threads", s.threads);
    sr.read("paper_scale", s.paper_scale);
    sr.finish();
    r.finish();
    return s;
}

json to_json(const ExperimentConfig& c) {
    const DistributionSpec& d = c.distribution;
    json dist = {{"kind", std::string(to_string(d.kind))},
                 {"margin", d.margin},
                 {"boundary", d.boundary},
                 {"rcn_rate", d.rcn_rate},
                 {"cluster_offset", d.cluster_offset},
                 {"dimension", d.dimension}};
    const NetworkConfig& n = c.network;
    json net = {{"width", n.width},
                {"leaky_slope", n.leaky_slope},
                {"activation", std::string(to_string(n.activation))},
                {"outer_magnitude", n.outer_magnitude ? json(*n.outer_magnitude) : json(nullptr)},
                {"biases", n.biases},
                {"outer_trainable", n.outer_trainable},
                {"hidden_layers", n.hidden_layers},
                {"init_variance", n.init_variance ? json(*n.init_variance) : json(nullptr)},
                {"permute_outer", n.permute_outer}};
    const TrainConfig& t = c.train;
    json train = {{"step_size", t.step_size},
                  {"iterations", t.iterations},
                  {"batch_mode", batch_mode_to_json(t.batch_mode)},
                  {"validation_size", t.validation_size},
                  {"validation_cadence", t.validation_cadence},
                  {"test_size", t.test_size},
                  {"loss", std::string(to_string(t.loss.kind))},
                  {"seed", t.seed},
                  {"diag_gamma_grid", t.diag_gamma_grid},
                  {"theorem_mode", t.theorem_mode}};
    return {{"version", kConfigVersion}, {"distribution", dist}, {"network", net}, {"train", train}};
}

json to_json(const SweepSpec& s) {
    json j = to_json(s.base);
    j["sweep"] = {{"variable", to_string(s.variable)}, {"values", s.values}, {"seeds", s.seeds}, {"threads", s.threads}, {"paper_scale", s.paper_scale}};
    return j;
}

json read_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read " + path.string());
    std::stringstream buffer;
    buffer << in.rdbuf();
    try {
        return json::parse(buffer.str());
    } catch (const json::parse_error& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
}

}  // namespace agn
