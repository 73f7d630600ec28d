#pragma once

#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "udpart/partition.hpp"

namespace udpart::io {

/// Malformed input file or record.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// {"breakpoints": ["0", "1/3", "5/9", "1"]}; rationals are "p/q" strings,
// integers may be written "p".
nlohmann::json to_json(const Partition& p);
Partition partition_from_json(const nlohmann::json& j);

nlohmann::json to_json(const Fraction& f);
Fraction fraction_from_json(const nlohmann::json& j);

/// One partition per line, compact.
void write_jsonl(std::ostream& os, const std::vector<Partition>& stream);
void write_jsonl_line(std::ostream& os, const Partition& p);
std::vector<Partition> read_jsonl(std::istream& is);
std::vector<Partition> read_jsonl_file(const std::filesystem::path& path);

/// Quotes a CSV field per RFC 4180 when it needs quoting.
std::string csv_field(const std::string& s);

}  // namespace udpart::io
