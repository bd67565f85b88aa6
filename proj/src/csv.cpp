#include "chaincast/csv.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "chaincast/errors.hpp"

namespace chaincast::csv {

namespace {

std::vector<std::string> split(std::string_view line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = line.find(',', start);
        if (pos == std::string_view::npos) {
            out.emplace_back(line.substr(start));
            break;
        }
        out.emplace_back(line.substr(start, pos - start));
        start = pos + 1;
    }
    return out;
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r'))
        s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
        s.remove_suffix(1);
    return s;
}

}  // namespace

Table read_file(const std::filesystem::path& path,
                const std::vector<std::string>& expected_header) {
    std::ifstream in(path);
    if (!in) throw IngestError("cannot open " + path.string());

    Table table;
    std::string line;
    long line_no = 0;

    if (!std::getline(in, line)) throw IngestError("no records in " + path.string());
    ++line_no;
    auto header_fields = split(line);
    for (auto& f : header_fields) f = std::string(trim(f));
    for (std::size_t i = 0; i < expected_header.size(); ++i) {
        if (i >= header_fields.size() || header_fields[i] != expected_header[i])
            throw IngestError("header mismatch in " + path.string() + ": missing column '" +
                                  expected_header[i] + "'",
                              1);
    }
    if (header_fields.size() != expected_header.size())
        throw IngestError("header mismatch in " + path.string() + ": unexpected extra columns", 1);
    table.header = header_fields;

    while (std::getline(in, line)) {
        ++line_no;
        std::string_view trimmed = trim(line);
        if (trimmed.empty()) continue;
        auto fields = split(trimmed);
        if (fields.size() != expected_header.size())
            throw IngestError("expected " + std::to_string(expected_header.size()) +
                                  " fields, got " + std::to_string(fields.size()),
                              line_no);
        for (auto& f : fields) f = std::string(trim(f));
        table.rows.push_back(std::move(fields));
        table.line_numbers.push_back(line_no);
    }
    if (table.rows.empty()) throw IngestError("no records in " + path.string());
    return table;
}

double parse_double(std::string_view field, long line, std::string_view what) {
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
    if (ec != std::errc() || ptr != field.data() + field.size())
        throw IngestError("malformed " + std::string(what) + " '" + std::string(field) + "'",
                          line);
    return v;
}

std::int64_t parse_int(std::string_view field, long line, std::string_view what) {
    std::int64_t v = 0;
    auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
    if (ec != std::errc() || ptr != field.data() + field.size())
        throw IngestError("malformed " + std::string(what) + " '" + std::string(field) + "'",
                          line);
    return v;
}

std::string format_double(double v) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

std::string join(const std::vector<std::string>& fields) {
    std::string out;
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) out += ',';
        out += fields[i];
    }
    return out;
}

void write_file(const std::filesystem::path& path, std::string_view content) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IngestError("cannot write " + path.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw IngestError("write failed for " + path.string());
}

}  // namespace chaincast::csv
