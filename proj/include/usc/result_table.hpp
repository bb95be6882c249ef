// result_table.hpp - CSV tables with a '#' header block carrying units and provenance
#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace usc {

struct Column {
    std::string name;
    std::string unit;
    bool nullable = false; // NaN is written as "undefined"
};

struct ResultTable {
    std::string title;
    std::vector<Column> columns;
    std::vector<std::vector<double>> rows;
    std::vector<std::pair<std::string, std::string>> provenance;

    int column_index(const std::string& name) const; // -1 when absent
    std::vector<double> column(const std::string& name) const;
    void add_row(std::vector<double> row);
    void set_provenance(const std::string& key, const std::string& value);
    // throws std::runtime_error on a non-finite entry in a non-nullable column
    void validate() const;
    std::string to_csv() const;
    void write(const std::string& path) const;
};

std::uint64_t fnv1a64(const std::string& data);
std::string fnv1a_hex(const std::string& data);
std::string format_number(double v);

extern const char* const kCodeVersion;

} // namespace usc
