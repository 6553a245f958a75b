#pragma once

#include <fstream>
#include <initializer_list>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

namespace levikal {

using Json = nlohmann::ordered_json;

// 17 significant digits, enough to round-trip any double.
std::string format_double(double v);

class CsvWriter {
public:
    CsvWriter(const std::string& path, const std::vector<std::string>& header);
    ~CsvWriter();

    void row(std::initializer_list<double> values);
    void row(const std::vector<double>& values);
    // Mixed row: numeric cells already formatted by the caller.
    void row_cells(const std::vector<std::string>& cells);
    void close();

private:
    std::string path_;
    std::ofstream out_;
    std::size_t columns_;
};

void write_le_double(std::ostream& out, double v);

void write_json(const std::string& path, const Json& doc);
Json read_json(const std::string& path);

}  // namespace levikal
