#include "agn/network_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include "agn/error.hpp"

namespace agn {

static_assert(std::endian::native == std::endian::little,
              "snapshot serialization assumes a little-endian host");

namespace {

constexpr char kMagic[4] = {'A', 'G', 'N', 'W'};

class Writer {
public:
    template <typename T>
    void put(T value) {
        const auto* p = reinterpret_cast<const std::uint8_t*>(&value);
        bytes.insert(bytes.end(), p, p + sizeof(T));
    }
    void put_doubles(std::span<const double> values) {
        for (double v : values) put(v);
    }
    std::vector<std::uint8_t> bytes;
};

class Reader {
public:
    explicit Reader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

    template <typename T>
    T get() {
        if (pos_ + sizeof(T) > bytes_.size()) throw ParseError("network snapshot is truncated");
        T value;
        std::memcpy(&value, bytes_.data() + pos_, sizeof(T));
        pos_ += sizeof(T);
        return value;
    }
    void get_doubles(std::span<double> out) {
        for (double& v : out) v = get<double>();
    }
    bool at_end() const { return pos_ == bytes_.size(); }

private:
    std::span<const std::uint8_t> bytes_;
    std::size_t pos_ = 0;
};

}  // namespace

std::vector<std::uint8_t> to_binary(const NetworkParams& params) {
    Writer w;
    for (char c : kMagic) w.put(c);
    w.put(kSnapshotVersion);
    w.put(static_cast<std::uint64_t>(params.width()));
    w.put(static_cast<std::uint64_t>(params.input_dim()));
    w.put(params.leaky_slope);
    w.put(static_cast<std::uint8_t>(params.activation));
    std::uint8_t flags = 0;
    if (params.has_biases()) flags |= 1u;
    if (params.outer_trainable) flags |= 2u;
    w.put(flags);
    w.put(std::uint16_t{0});
    w.put(static_cast<std::uint32_t>(params.depth_extension.size()));
    w.put_doubles(params.hidden_weights.flat());
    w.put_doubles(params.outer_weights);
    if (params.hidden_biases) w.put_doubles(*params.hidden_biases);
    for (const Matrix& layer : params.depth_extension) w.put_doubles(layer.flat());
    return std::move(w.bytes);
}

NetworkParams from_binary(std::span<const std::uint8_t> bytes) {
    Reader r(bytes);
    for (char c : kMagic) {
        if (r.get<char>() != c) throw ParseError("not a network snapshot (bad magic)");
    }
    if (const auto version = r.get<std::uint32_t>(); version != kSnapshotVersion) {
        throw ParseError("unsupported snapshot version " + std::to_string(version));
    }
    const auto m = r.get<std::uint64_t>();
    const auto d = r.get<std::uint64_t>();
    if (m == 0 || d == 0 || m > (1u << 24) || d > (1u << 24)) {
        throw ParseError("snapshot has implausible shape");
    }
    NetworkParams params;
    params.leaky_slope = r.get<double>();
    const auto activation = r.get<std::uint8_t>();
    if (activation > static_cast<std::uint8_t>(ActivationKind::hard_tanh)) {
        throw ParseError("snapshot has unknown activation code");
    }
    params.activation = static_cast<ActivationKind>(activation);
    const auto flags = r.get<std::uint8_t>();
    r.get<std::uint16_t>();
    const auto layers = r.get<std::uint32_t>();
    params.hidden_weights = Matrix(m, d);
    r.get_doubles(params.hidden_weights.flat());
    params.outer_weights.resize(m);
    r.get_doubles(params.outer_weights);
    if (flags & 1u) {
        params.hidden_biases = std::vector<double>(m);
        r.get_doubles(*params.hidden_biases);
    }
    params.outer_trainable = (flags & 2u) != 0;
    for (std::uint32_t l = 0; l < layers; ++l) {
        Matrix layer(m, m);
        r.get_doubles(layer.flat());
        params.depth_extension.push_back(std::move(layer));
    }
    if (!r.at_end()) throw ParseError("network snapshot has trailing bytes");
    params.validate();
    return params;
}

namespace {

nlohmann::json matrix_to_json(const Matrix& m) {
    return {{"rows", m.rows()}, {"cols", m.cols()},
            {"data", std::vector<double>(m.flat().begin(), m.flat().end())}};
}

Matrix matrix_from_json(const nlohmann::json& j) {
    Matrix m(j.at("rows").get<std::size_t>(), j.at("cols").get<std::size_t>());
    const auto data = j.at("data").get<std::vector<double>>();
    if (data.size() != m.size()) throw ParseError("matrix data length does not match shape");
    std::copy(data.begin(), data.end(), m.flat().begin());
    return m;
}

}  // namespace

nlohmann::json to_json(const NetworkParams& params) {
    nlohmann::json j;
    j["format"] = "agn-network";
    j["version"] = kSnapshotVersion;
    j["m"] = params.width();
    j["d"] = params.input_dim();
    j["leaky_slope"] = params.leaky_slope;
    j["activation"] = std::string(to_string(params.activation));
    j["outer_trainable"] = params.outer_trainable;
    j["hidden_weights"] = matrix_to_json(params.hidden_weights);
    j["outer_weights"] = params.outer_weights;
    j["hidden_biases"] = params.hidden_biases ? nlohmann::json(*params.hidden_biases) : nlohmann::json();
    j["depth_extension"] = nlohmann::json::array();
    for (const Matrix& layer : params.depth_extension) j["depth_extension"].push_back(matrix_to_json(layer));
    return j;
}

NetworkParams network_from_json(const nlohmann::json& j) {
    try {
        if (j.at("format") != "agn-network") throw ParseError("not a network snapshot");
        if (j.at("version").get<std::uint32_t>() != kSnapshotVersion) {
            throw ParseError("unsupported snapshot version");
        }
        NetworkParams params;
        params.leaky_slope = j.at("leaky_slope").get<double>();
        params.activation = activation_from_string(j.at("activation").get<std::string>());
        params.outer_trainable = j.at("outer_trainable").get<bool>();
        params.hidden_weights = matrix_from_json(j.at("hidden_weights"));
        params.outer_weights = j.at("outer_weights").get<std::vector<double>>();
        if (!j.at("hidden_biases").is_null()) {
            params.hidden_biases = j.at("hidden_biases").get<std::vector<double>>();
        }
        for (const auto& layer : j.at("depth_extension")) {
            params.depth_extension.push_back(matrix_from_json(layer));
        }
        if (params.width() != j.at("m").get<std::size_t>() ||
            params.input_dim() != j.at("d").get<std::size_t>()) {
            throw ParseError("snapshot header shape disagrees with weights");
        }
        params.validate();
        return params;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("malformed network JSON: ") + e.what());
    }
}

void save_network(const NetworkParams& params, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    if (path.extension() == ".json") {
        out << to_json(params).dump(1) << '\n';
    } else {
        const auto bytes = to_binary(params);
        out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    }
    if (!out) throw IoError("failed writing " + path.string());
}

NetworkParams load_network(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read " + path.string());
    if (path.extension() == ".json") {
        try {
            return network_from_json(nlohmann::json::parse(in));
        } catch (const nlohmann::json::parse_error& e) {
            throw ParseError(path.string() + ": " + e.what());
        }
    }
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return from_binary(bytes);
}

}  // namespace agn
