// result_table.cpp - CSV emission and FNV-1a provenance hashing
#include "usc/result_table.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace usc {

const char* const kCodeVersion = "1.0.0";

int ResultTable::column_index(const std::string& name) const {
    for (size_t k = 0; k < columns.size(); ++k)
        if (columns[k].name == name) return static_cast<int>(k);
    return -1;
}

std::vector<double> ResultTable::column(const std::string& name) const {
    const int k = column_index(name);
    if (k < 0) throw std::out_of_range("no column named " + name);
    std::vector<double> out;
    out.reserve(rows.size());
    for (const auto& r : rows) out.push_back(r[k]);
    return out;
}

void ResultTable::add_row(std::vector<double> row) {
    if (row.size() != columns.size())
        throw std::invalid_argument("row has " + std::to_string(row.size()) + " entries, table has " +
                                    std::to_string(columns.size()) + " columns");
    rows.push_back(std::move(row));
}

void ResultTable::set_provenance(const std::string& key, const std::string& value) {
    for (auto& kv : provenance)
        if (kv.first == key) {
            kv.second = value;
            return;
        }
    provenance.emplace_back(key, value);
}

void ResultTable::validate() const {
    for (size_t r = 0; r < rows.size(); ++r)
        for (size_t c = 0; c < columns.size(); ++c)
            if (!std::isfinite(rows[r][c]) && !(columns[c].nullable && std::isnan(rows[r][c])))
                throw std::runtime_error("non-finite value in column " + columns[c].name + ", row " +
                                         std::to_string(r));
}

std::string format_number(double v) {
    if (std::isnan(v)) return "undefined";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

std::string ResultTable::to_csv() const {
    std::string out;
    if (!title.empty()) out += "# " + title + "\n";
    for (const auto& [k, v] : provenance) out += "# " + k + ": " + v + "\n";
    out += "# units:";
    for (size_t c = 0; c < columns.size(); ++c) out += (c ? "," : " ") + (columns[c].unit.empty() ? "1" : columns[c].unit);
    out += "\n";
    for (size_t c = 0; c < columns.size(); ++c) out += (c ? "," : "") + columns[c].name;
    out += "\n";
    for (const auto& r : rows) {
        for (size_t c = 0; c < r.size(); ++c) out += (c ? "," : "") + format_number(r[c]);
        out += "\n";
    }
    return out;
}

void ResultTable::write(const std::string& path) const {
    validate();
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open " + path + " for writing");
    f << to_csv();
    if (!f) throw std::runtime_error("failed writing " + path);
}

std::uint64_t fnv1a64(const std::string& data) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : data) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string fnv1a_hex(const std::string& data) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(data)));
    return buf;
}

} // namespace usc
