#include "spraylab/csv.hpp"

#include <cstdlib>
#include <sstream>

namespace spray {

CsvTable read_csv(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("cannot open csv: " + path.string());
    CsvTable table;
    std::string line;
    if (!std::getline(is, line))
        throw ConfigError("empty csv: " + path.string());
    {
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) table.header.push_back(cell);
    }
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::vector<double> row;
        row.reserve(table.header.size());
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            char* end = nullptr;
            const double v = std::strtod(cell.c_str(), &end);
            if (end == cell.c_str())
                throw ConfigError("non-numeric csv cell '" + cell + "' in " + path.string());
            row.push_back(v);
        }
        if (row.size() != table.header.size())
            throw ConfigError("ragged csv row in " + path.string());
        table.rows.push_back(std::move(row));
    }
    return table;
}

} // namespace spray
