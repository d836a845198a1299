#pragma once

#include <charconv>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "ergolab/core.hpp"

namespace ergolab {

// shortest decimal that round-trips the double
inline std::string format_double(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

// RFC-4180: quote fields containing comma, quote, or newline; double quotes
inline std::string csv_escape(const std::string& field) {
    bool needs = field.find_first_of(",\"\r\n") != std::string::npos;
    if (!needs) return field;
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += "\"\"";
        else out += c;
    }
    out += "\"";
    return out;
}

class CsvWriter {
public:
    explicit CsvWriter(std::vector<std::string> header) : header_(std::move(header)) {}

    void row(std::vector<std::string> fields) {
        require(fields.size() == header_.size(), ErrorCode::validation,
                "csv row width mismatch");
        rows_.push_back(std::move(fields));
    }

    std::string body() const {
        std::ostringstream os;
        emit(os, header_);
        for (auto& r : rows_) emit(os, r);
        return os.str();
    }

    void write(const std::string& path) const {
        std::ofstream f(path, std::ios::binary);
        require(f.good(), ErrorCode::io_error, "cannot open csv output: " + path);
        f << body();
        require(f.good(), ErrorCode::io_error, "csv write failed: " + path);
    }

    static std::string num(double v) { return format_double(v); }
    static std::string num(int64_t v) { return std::to_string(v); }

private:
    static void emit(std::ostringstream& os, const std::vector<std::string>& fields) {
        for (size_t i = 0; i < fields.size(); ++i) {
            if (i) os << ',';
            os << csv_escape(fields[i]);
        }
        os << "\r\n";
    }

    std::vector<std::string> header_;
    std::vector<std::vector<std::string>> rows_;
};

}  // namespace ergolab
