#ifndef SHIMURA_TABLES_HPP
#define SHIMURA_TABLES_HPP

#include <optional>
#include <string>
#include <vector>

#include "shimura/enumerate.hpp"

namespace shimura {

struct GoldenRow {
    int degree = 1;
    Int d_F = 1;
    int field_index = 0;
    Int D = 1;
    Int N = 1;
    std::string label;
    std::string signature;
    int genus = 0;

    auto operator<=>(const GoldenRow&) const = default;
};

// Resolution order: explicit argument, SHIMURA_GOLDEN_PATH, bundled file.
std::string default_golden_path();

// Parses the bundled CSV; enforces the 858-row census and its genus histogram.
std::vector<GoldenRow> parse_tables(const std::string& path);

std::string render_row(const GoldenRow& row); // canonical CSV line

struct DiffReport {
    std::vector<GoldenRow> missing;  // golden rows the computation did not produce
    std::vector<GoldenRow> extra;    // computed rows absent from the golden data
    bool empty() const { return missing.empty() && extra.empty(); }
    std::string text() const;
    std::string json() const;
};

DiffReport verify(const std::vector<CurveRecord>& computed,
                  const std::vector<GoldenRow>& golden, int degree);

GoldenRow golden_of_record(const CurveRecord& rec, int degree);

std::vector<GoldenRow> lookup(const std::vector<GoldenRow>& golden, Int d_F, Int D,
                              Int N, const std::optional<std::string>& label = {});

} // namespace shimura

#endif
