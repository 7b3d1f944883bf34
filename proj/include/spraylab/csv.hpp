#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "spraylab/errors.hpp"

namespace spray {

// CSV writer pinned to round-trip-exact doubles ("%.17g") so reruns with the
// same seed produce byte-identical files.
class CsvWriter {
public:
    CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header)
        : os_(path, std::ios::trunc) {
        if (!os_) throw ConfigError("cannot open for writing: " + path.string());
        for (std::size_t i = 0; i < header.size(); ++i)
            os_ << (i ? "," : "") << header[i];
        os_ << "\n";
        columns_ = header.size();
    }

    void row(const std::vector<double>& values) {
        if (values.size() != columns_)
            throw InvariantViolation("csv row width mismatch");
        char buf[32];
        for (std::size_t i = 0; i < values.size(); ++i) {
            std::snprintf(buf, sizeof buf, "%.17g", values[i]);
            os_ << (i ? "," : "") << buf;
        }
        os_ << "\n";
    }

private:
    std::ofstream os_;
    std::size_t columns_ = 0;
};

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;

    int column(const std::string& name) const {
        for (std::size_t i = 0; i < header.size(); ++i)
            if (header[i] == name) return static_cast<int>(i);
        throw ConfigError("csv column not found: " + name);
    }
};

CsvTable read_csv(const std::filesystem::path& path);

} // namespace spray
