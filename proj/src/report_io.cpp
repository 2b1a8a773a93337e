#include "tentshadow/report_io.hpp"

#include <cmath>
#include <cstdio>

#include "tentshadow/error.hpp"

namespace tentshadow {

std::string format_real(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[32];
    int len = std::snprintf(buf, sizeof buf, "%.17g", x);
    return std::string(buf, static_cast<std::size_t>(len));
}

std::string csv_field(std::string_view text) {
    if (text.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(text);
    std::string quoted = "\"";
    for (char ch : text) {
        if (ch == '"') quoted += '"';
        quoted += ch;
    }
    quoted += '"';
    return quoted;
}

CsvWriter::CsvWriter(const std::filesystem::path& path, std::initializer_list<std::string_view> header)
    : CsvWriter(path, std::vector<std::string>(header.begin(), header.end())) {}

CsvWriter::CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header)
    : path_(path), out_(path, std::ios::binary) {
    if (!out_) throw IoError("cannot open " + path.string() + " for writing");
    row(header);
}

CsvWriter::~CsvWriter() noexcept(false) {
    out_.flush();
    if (!out_ && std::uncaught_exceptions() == 0) throw IoError("write failed for " + path_.string());
}

void CsvWriter::row(const std::vector<std::string>& cells) {
    std::string line;
    bool first = true;
    for (const auto& c : cells) append(line, first, csv_field(c));
    write_line(line);
}

void CsvWriter::write_line(const std::string& line) {
    out_ << line << '\n';
    if (!out_) throw IoError("write failed for " + path_.string());
}

} // namespace tentshadow
