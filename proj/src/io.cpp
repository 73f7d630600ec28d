#include "udpart/io.hpp"

#include <fstream>
#include <istream>
#include <ostream>

namespace udpart::io {

nlohmann::json to_json(const Fraction& f) { return f.str(); }

Fraction fraction_from_json(const nlohmann::json& j) {
  if (j.is_string()) {
    try {
      return Fraction::parse(j.get<std::string>());
    } catch (const std::invalid_argument& e) {
      throw FormatError(e.what());
    }
  }
  if (j.is_number_integer()) return Fraction(j.get<long>());
  throw FormatError("expected a rational string \"p/q\", got " + j.dump());
}

nlohmann::json to_json(const Partition& p) {
  nlohmann::json points = nlohmann::json::array();
  for (const auto& t : p.breakpoints()) points.push_back(t.str());
  return nlohmann::json{{"breakpoints", std::move(points)}};
}

Partition partition_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("breakpoints") || !j.at("breakpoints").is_array()) {
    throw FormatError("partition record must be an object with a \"breakpoints\" array");
  }
  std::vector<Fraction> b;
  b.reserve(j.at("breakpoints").size());
  for (const auto& v : j.at("breakpoints")) b.push_back(fraction_from_json(v));
  try {
    return Partition(std::move(b));
  } catch (const PreconditionError& e) {
    throw FormatError(e.what());
  }
}

void write_jsonl_line(std::ostream& os, const Partition& p) { os << to_json(p).dump() << '\n'; }

void write_jsonl(std::ostream& os, const std::vector<Partition>& stream) {
  for (const auto& p : stream) write_jsonl_line(os, p);
}

std::vector<Partition> read_jsonl(std::istream& is) {
  std::vector<Partition> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(partition_from_json(nlohmann::json::parse(line)));
    } catch (const nlohmann::json::exception& e) {
      throw FormatError("line " + std::to_string(lineno) + ": " + e.what());
    } catch (const FormatError& e) {
      throw FormatError("line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

std::vector<Partition> read_jsonl_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path.string());
  return read_jsonl(in);
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace udpart::io
