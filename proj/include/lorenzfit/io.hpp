#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "lorenzfit/distributions.hpp"
#include "lorenzfit/grouped.hpp"
#include "lorenzfit/measures.hpp"
#include "lorenzfit/synth.hpp"

namespace lorenzfit::io {

// One input record: either a valid dataset or the reason it was rejected.
struct DatasetRecord {
  std::size_t line = 0;  // 1-based line in the input
  std::string id;
  std::optional<GroupedDataset> data;
  std::string error;
};

enum class InputFormat { JsonLines, Csv };

// JSON lines: {"id": str, "u": [...], "s": [...], "mean": num?, "gini": num?}
// with cumulative u and s.  Blank lines are skipped.
//
// CSV: a header naming the columns id, share1..shareJ, mean, gini (mean and
// gini optional, any order).  Shares are non-cumulative, equal-population
// groups; shares summing to 100 are read as percentages.  Empty, NA and null
// cells are missing values.
std::vector<DatasetRecord> read_grouped(std::istream& in, InputFormat format);

// Format from the extension: .csv is CSV, anything else JSON lines.
InputFormat format_for_path(const std::string& path);

std::string dataset_to_jsonl(const GroupedDataset& d);

// Household microdata CSV with header columns income, weight?, size?.
struct HouseholdData {
  Microdata micro;
  std::optional<std::vector<double>> sizes;
};
HouseholdData read_microdata(std::istream& in);
void write_microdata(std::ostream& out, const Microdata& m);

// "gb2:2.5,1,1.5,2" -> FamilySpec::gb2(2.5, 1, 1.5, 2); parameters in
// FamilySpec order.
FamilySpec parse_family_spec(const std::string& text);

// "beta,alpha,omega,mu,sigma".
MixtureSpec parse_mixture_spec(const std::string& text);

// Comma-separated list helpers.
std::vector<std::string> split(const std::string& text, char sep);
std::vector<double> parse_doubles(const std::string& text);

// Shortest round-trip decimal text for a double.
std::string format_double(double v);

}  // namespace lorenzfit::io
