#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>

#include "agn/distributions.hpp"
#include "agn/error.hpp"

namespace agn {

namespace {

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

constexpr char kSampleMagic[4] = {'A', 'G', 'N', 'S'};
constexpr std::uint32_t kSampleVersion = 1;

}  // namespace

void write_samples_csv(const Dataset& data, const std::filesystem::path& path,
                       std::string_view header_comment) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    if (!header_comment.empty()) out << "# " << header_comment << '\n';
    for (std::size_t k = 0; k < data.dim(); ++k) out << 'x' << (k + 1) << ',';
    out << "y\n";
    for (std::size_t i = 0; i < data.size(); ++i) {
        for (double v : data.x(i)) out << format_double(v) << ',';
        out << data.y(i) << '\n';
    }
    if (!out) throw IoError("failed writing " + path.string());
}

Dataset read_samples_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read " + path.string());
    std::string line;
    std::size_t line_no = 0;
    std::size_t dim = 0;
    Dataset data;
    bool have_header = false;
    std::vector<double> x;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        std::vector<std::string> fields;
        std::stringstream ss(line);
        std::string field;
        while (std::getline(ss, field, ',')) fields.push_back(field);
        if (!have_header) {
            if (fields.size() < 2 || fields.back() != "y") {
                throw ParseError(path.string() + ":" + std::to_string(line_no) + ": header must end in 'y'");
            }
            dim = fields.size() - 1;
            data = Dataset(dim);
            x.resize(dim);
            have_header = true;
            continue;
        }
        if (fields.size() != dim + 1) {
            throw ParseError(path.string() + ":" + std::to_string(line_no) + ": expected " +
                             std::to_string(dim + 1) + " fields");
        }
        try {
            for (std::size_t k = 0; k < dim; ++k) {
                std::size_t used = 0;
                x[k] = std::stod(fields[k], &used);
                if (used != fields[k].size()) throw std::invalid_argument("trailing characters");
            }
            const int y = std::stoi(fields[dim]);
            data.push_back(x, y);
        } catch (const std::exception& e) {
            throw ParseError(path.string() + ":" + std::to_string(line_no) + ": bad row (" + e.what() + ")");
        }
    }
    if (!have_header) throw ParseError(path.string() + ": missing header row");
    return data;
}

void write_samples_binary(const Dataset& data, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    out.write(kSampleMagic, 4);
    const std::uint32_t version = kSampleVersion;
    const std::uint64_t d = data.dim();
    const std::uint64_t n = data.size();
    out.write(reinterpret_cast<const char*>(&version), sizeof version);
    out.write(reinterpret_cast<const char*>(&d), sizeof d);
    out.write(reinterpret_cast<const char*>(&n), sizeof n);
    out.write(reinterpret_cast<const char*>(data.features().data()),
              static_cast<std::streamsize>(data.features().size() * sizeof(double)));
    for (int y : data.labels()) {
        const auto label = static_cast<std::int8_t>(y);
        out.write(reinterpret_cast<const char*>(&label), 1);
    }
    if (!out) throw IoError("failed writing " + path.string());
}

Dataset read_samples_binary(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read " + path.string());
    char magic[4];
    std::uint32_t version = 0;
    std::uint64_t d = 0, n = 0;
    in.read(magic, 4);
    in.read(reinterpret_cast<char*>(&version), sizeof version);
    in.read(reinterpret_cast<char*>(&d), sizeof d);
    in.read(reinterpret_cast<char*>(&n), sizeof n);
    if (!in || std::memcmp(magic, kSampleMagic, 4) != 0) throw ParseError(path.string() + ": not a sample file");
    if (version != kSampleVersion) throw ParseError(path.string() + ": unsupported sample file version");
    if (d == 0 || d > (1u << 20)) throw ParseError(path.string() + ": implausible dimension");
    std::vector<double> features(d * n);
    in.read(reinterpret_cast<char*>(features.data()), static_cast<std::streamsize>(features.size() * sizeof(double)));
    std::vector<std::int8_t> labels(n);
    in.read(reinterpret_cast<char*>(labels.data()), static_cast<std::streamsize>(n));
    if (!in) throw ParseError(path.string() + ": truncated sample file");
    Dataset data(d);
    data.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        data.push_back(std::span<const double>(features.data() + i * d, d), labels[i]);
    }
    return data;
}

}  // namespace agn
