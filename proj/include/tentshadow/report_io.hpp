#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <string>
#include <string_view>
#include <type_traits>
#include <vector>

namespace tentshadow {

/// 17 significant digits; parses back to the same double.
std::string format_real(double x);

/// RFC 4180 quoting: fields containing a comma, quote or line break are quoted.
std::string csv_field(std::string_view text);

/// Header row on construction, one record per row() call, LF line endings.
class CsvWriter {
public:
    CsvWriter(const std::filesystem::path& path, std::initializer_list<std::string_view> header);
    CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header);
    ~CsvWriter() noexcept(false);

    template <class... Ts>
    void row(const Ts&... fields) {
        std::string line;
        bool first = true;
        ((append(line, first, cell(fields))), ...);
        write_line(line);
    }

    void row(const std::vector<std::string>& cells);

private:
    static std::string cell(double v) { return format_real(v); }
    static std::string cell(std::string_view v) { return csv_field(v); }
    static std::string cell(const std::string& v) { return csv_field(v); }
    static std::string cell(const char* v) { return csv_field(v); }
    static std::string cell(bool v) { return v ? "true" : "false"; }
    template <class T>
        requires std::is_integral_v<T>
    static std::string cell(T v) { return std::to_string(v); }

    static void append(std::string& line, bool& first, const std::string& text) {
        if (!first) line += ',';
        line += text;
        first = false;
    }
    void write_line(const std::string& line);

    std::filesystem::path path_;
    std::ofstream out_;
};

} // namespace tentshadow
