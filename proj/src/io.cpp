#include "lorenzfit/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "lorenzfit/errors.hpp"

namespace lorenzfit::io {

namespace {

using nlohmann::json;

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

bool is_missing(const std::string& cell) {
  const auto c = lower(trim(cell));
  return c.empty() || c == "na" || c == "nan" || c == "null";
}

double to_double(const std::string& text) {
  const std::string t = trim(text);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || ptr != t.data() + t.size()) throw std::invalid_argument("not a number: '" + t + "'");
  return v;
}

std::vector<double> json_numbers(const json& j, const char* key) {
  if (!j.contains(key)) throw std::invalid_argument(std::string("missing field '") + key + "'");
  const auto& a = j.at(key);
  if (!a.is_array()) throw std::invalid_argument(std::string("field '") + key + "' must be an array");
  std::vector<double> out;
  for (const auto& v : a) {
    if (!v.is_number()) throw std::invalid_argument(std::string("field '") + key + "' must hold numbers");
    out.push_back(v.get<double>());
  }
  return out;
}

std::optional<double> json_optional(const json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  if (!j.at(key).is_number()) throw std::invalid_argument(std::string("field '") + key + "' must be a number");
  return j.at(key).get<double>();
}

DatasetRecord parse_json_line(const std::string& line, std::size_t lineno) {
  DatasetRecord rec;
  rec.line = lineno;
  rec.id = "line" + std::to_string(lineno);
  try {
    const json j = json::parse(line);
    if (!j.is_object()) throw std::invalid_argument("record must be a JSON object");
    if (j.contains("id")) rec.id = j.at("id").is_string() ? j.at("id").get<std::string>() : j.at("id").dump();
    GroupedDataset d;
    d.id = rec.id;
    d.u = json_numbers(j, "u");
    d.s = json_numbers(j, "s");
    d.mean = json_optional(j, "mean");
    d.survey_gini = json_optional(j, "gini");
    d.validate();
    rec.data = std::move(d);
  } catch (const std::exception& e) {
    rec.error = e.what();
  }
  return rec;
}

std::vector<DatasetRecord> read_csv(std::istream& in) {
  std::vector<DatasetRecord> out;
  std::string line;
  std::size_t lineno = 0;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    if (header.empty()) {
      for (auto& h : split(line, ',')) header.push_back(lower(trim(h)));
      continue;
    }
    DatasetRecord rec;
    rec.line = lineno;
    rec.id = "line" + std::to_string(lineno);
    try {
      const auto cells = split(line, ',');
      if (cells.size() != header.size()) throw std::invalid_argument("column count differs from header");
      std::vector<std::pair<int, double>> shares;
      std::optional<double> mean, gini;
      for (std::size_t c = 0; c < cells.size(); ++c) {
        const auto& h = header[c];
        if (h == "id") {
          if (!is_missing(cells[c])) rec.id = trim(cells[c]);
        } else if (h == "mean") {
          if (!is_missing(cells[c])) mean = to_double(cells[c]);
        } else if (h == "gini") {
          if (!is_missing(cells[c])) gini = to_double(cells[c]);
        } else if (h.rfind("share", 0) == 0) {
          if (is_missing(cells[c])) continue;
          shares.emplace_back(std::stoi(h.substr(5)), to_double(cells[c]));
        }
      }
      std::stable_sort(shares.begin(), shares.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
      std::vector<double> c;
      for (const auto& sh : shares) c.push_back(sh.second);
      const double total = std::accumulate(c.begin(), c.end(), 0.0);
      if (std::abs(total - 100.0) < 1e-3) {
        for (auto& v : c) v /= 100.0;
      }
      GroupedDataset d = from_shares(c, std::nullopt, rec.id);
      d.mean = mean;
      d.survey_gini = gini;
      d.validate();
      rec.data = std::move(d);
    } catch (const std::exception& e) {
      rec.error = e.what();
    }
    out.push_back(std::move(rec));
  }
  return out;
}

}  // namespace

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream is(text);
  while (std::getline(is, cur, sep)) out.push_back(cur);
  if (!text.empty() && text.back() == sep) out.emplace_back();
  return out;
}

std::vector<double> parse_doubles(const std::string& text) {
  std::vector<double> out;
  for (const auto& t : split(text, ',')) out.push_back(to_double(t));
  return out;
}

std::string format_double(double v) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

InputFormat format_for_path(const std::string& path) {
  const auto dot = path.rfind('.');
  if (dot != std::string::npos && lower(path.substr(dot)) == ".csv") return InputFormat::Csv;
  return InputFormat::JsonLines;
}

std::vector<DatasetRecord> read_grouped(std::istream& in, InputFormat format) {
  if (format == InputFormat::Csv) return read_csv(in);
  std::vector<DatasetRecord> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    out.push_back(parse_json_line(line, lineno));
  }
  return out;
}

std::string dataset_to_jsonl(const GroupedDataset& d) {
  json j;
  j["id"] = d.id;
  j["u"] = d.u;
  j["s"] = d.s;
  j["mean"] = d.mean ? json(*d.mean) : json(nullptr);
  j["gini"] = d.survey_gini ? json(*d.survey_gini) : json(nullptr);
  return j.dump();
}

HouseholdData read_microdata(std::istream& in) {
  std::string line;
  std::vector<std::string> header;
  HouseholdData hd;
  std::vector<double> sizes;
  int ci = -1, cw = -1, cs = -1;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    const auto cells = split(line, ',');
    if (header.empty()) {
      for (auto& h : cells) header.push_back(lower(trim(h)));
      for (std::size_t c = 0; c < header.size(); ++c) {
        if (header[c] == "income") ci = static_cast<int>(c);
        if (header[c] == "weight") cw = static_cast<int>(c);
        if (header[c] == "size") cs = static_cast<int>(c);
      }
      if (ci < 0) throw ValidationError({"microdata header must name an 'income' column"});
      continue;
    }
    if (cells.size() != header.size()) {
      throw ValidationError({"line " + std::to_string(lineno) + ": column count differs from header"});
    }
    try {
      hd.micro.values.push_back(to_double(cells[static_cast<std::size_t>(ci)]));
      hd.micro.weights.push_back(cw >= 0 ? to_double(cells[static_cast<std::size_t>(cw)]) : 1.0);
      if (cs >= 0) sizes.push_back(to_double(cells[static_cast<std::size_t>(cs)]));
    } catch (const std::exception& e) {
      throw ValidationError({"line " + std::to_string(lineno) + ": " + e.what()});
    }
  }
  if (cs >= 0) hd.sizes = std::move(sizes);
  return hd;
}

void write_microdata(std::ostream& out, const Microdata& m) {
  out << "income,weight\n";
  for (std::size_t i = 0; i < m.size(); ++i) out << format_double(m.values[i]) << ',' << format_double(m.weights[i]) << '\n';
}

FamilySpec parse_family_spec(const std::string& text) {
  const auto colon = text.find(':');
  if (colon == std::string::npos) throw std::invalid_argument("distribution must look like family:p1,p2,...");
  return FamilySpec(parse_family(lower(trim(text.substr(0, colon)))), parse_doubles(text.substr(colon + 1)));
}

MixtureSpec parse_mixture_spec(const std::string& text) {
  const auto v = parse_doubles(text);
  if (v.size() != 5) throw std::invalid_argument("mixture needs beta,alpha,omega,mu,sigma");
  MixtureSpec m{v[0], v[1], v[2], v[3], v[4]};
  m.validate();
  return m;
}

}  // namespace lorenzfit::io
