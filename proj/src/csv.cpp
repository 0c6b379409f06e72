#include "agn/csv.hpp"

#include <charconv>
#include <cmath>
#include <sstream>

#include "agn/error.hpp"

namespace agn {

std::string format_number(double v) {
    if (std::isnan(v)) return {};
    char buf[64];
    const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return ec == std::errc() ? std::string(buf, end) : std::string("nan");
}

namespace {

std::string quote(std::string_view text) {
    if (text.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(text);
    std::string out = "\"";
    for (char c : text) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

}  // namespace

CsvWriter::CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header,
                     std::string_view comment)
    : path_(path), out_(path), columns_(header.size()) {
    if (!out_) throw IoError("cannot write " + path.string());
    if (!comment.empty()) out_ << "# " << comment << "\r\n";
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (i) out_ << ',';
        out_ << quote(header[i]);
    }
    out_ << "\r\n";
}

CsvWriter& CsvWriter::field(std::string_view text) {
    if (in_row_ >= columns_) throw Error("CSV row has more fields than the header");
    if (in_row_) out_ << ',';
    out_ << quote(text);
    ++in_row_;
    return *this;
}

CsvWriter& CsvWriter::field(double value) { return field(std::string_view(format_number(value))); }

CsvWriter& CsvWriter::field(long long value) { return field(std::string_view(std::to_string(value))); }

void CsvWriter::end_row() {
    if (in_row_ != columns_) throw Error("CSV row has fewer fields than the header");
    out_ << "\r\n";
    in_row_ = 0;
}

void CsvWriter::close() {
    out_.close();
    if (!out_) throw IoError("failed writing " + path_.string());
}

std::size_t CsvTable::column(std::string_view name) const {
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (header[i] == name) return i;
    }
    throw ParseError("CSV is missing column '" + std::string(name) + "'");
}

CsvTable read_csv(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read " + path.string());
    std::stringstream buffer;
    buffer << in.rdbuf();
    const std::string text = buffer.str();

    CsvTable table;
    std::vector<std::string> record;
    std::string field;
    std::size_t line = 1;
    std::size_t record_line = 1;
    bool in_quotes = false;
    bool at_record_start = true;
    bool have_header = false;

    auto finish_record = [&]() {
        record.push_back(std::move(field));
        field.clear();
        if (!have_header) {
            table.header = std::move(record);
            have_header = true;
        } else {
            if (record.size() != table.header.size()) {
                throw ParseError(path.string() + ":" + std::to_string(record_line) + ": expected " +
                                 std::to_string(table.header.size()) + " fields, found " +
                                 std::to_string(record.size()));
            }
            table.rows.push_back(std::move(record));
            table.line_numbers.push_back(record_line);
        }
        record.clear();
        at_record_start = true;
    };

    for (std::size_t i = 0; i < text.size(); ++i) {
        const char c = text[i];
        if (at_record_start) {
            record_line = line;
            if (c == '#') {
                while (i < text.size() && text[i] != '\n') ++i;
                ++line;
                continue;
            }
            if (c == '\n' || c == '\r') {
                if (c == '\n') ++line;
                continue;
            }
            at_record_start = false;
        }
        if (in_quotes) {
            if (c == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    field += '"';
                    ++i;
                } else {
                    in_quotes = false;
                }
            } else {
                if (c == '\n') ++line;
                field += c;
            }
            continue;
        }
        if (c == '"') {
            in_quotes = true;
        } else if (c == ',') {
            record.push_back(std::move(field));
            field.clear();
        } else if (c == '\r') {
            // CRLF handled at the '\n'.
        } else if (c == '\n') {
            ++line;
            finish_record();
        } else {
            field += c;
        }
    }
    if (in_quotes) throw ParseError(path.string() + ":" + std::to_string(record_line) + ": unterminated quote");
    if (!at_record_start) finish_record();
    if (!have_header) throw ParseError(path.string() + ": missing header row");
    return table;
}

double parse_number(const CsvTable& table, std::size_t row, std::size_t column, const std::string& source) {
    const std::string& cell = table.rows.at(row).at(column);
    double value = 0.0;
    const auto [end, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
    if (ec != std::errc() || end != cell.data() + cell.size() || cell.empty()) {
        throw ParseError(source + ":" + std::to_string(table.line_numbers.at(row)) + ": column '" +
                         table.header.at(column) + "' is not a number ('" + cell + "')");
    }
    return value;
}

}  // namespace agn
