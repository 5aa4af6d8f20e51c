#pragma once

#include <charconv>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <istream>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "gsp/error.hpp"
#include "gsp/matrix.hpp"

namespace gsp {

struct LabelEntry {
  std::size_t row_index = 0;
  int class_id = 0;

  friend bool operator==(const LabelEntry&, const LabelEntry&) = default;
};

/// Class labels for rows of the labeled (few-shot) matrix.
struct LabelTable {
  std::vector<LabelEntry> entries;

  [[nodiscard]] std::size_t size() const noexcept { return entries.size(); }
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

template <typename T>
T parse_int(std::string_view field, std::size_t line, std::string_view column) {
  T value{};
  const auto* end = field.data() + field.size();
  const auto [ptr, ec] = std::from_chars(field.data(), end, value);
  if (ec != std::errc{} || ptr != end) {
    throw FormatError("labels line " + std::to_string(line) + ": bad " + std::string(column) + " '" +
                      std::string(field) + "'");
  }
  return value;
}

}  // namespace detail

/// Parse `index,label` CSV and validate it against the matrix it labels.
inline LabelTable parse_labels(std::istream& in, std::size_t row_count, int num_classes) {
  std::string line;
  if (!std::getline(in, line) || detail::trim(line) != "index,label") {
    throw FormatError("labels: header must be exactly 'index,label'");
  }
  LabelTable table;
  std::set<std::size_t> seen;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    const auto text = detail::trim(line);
    if (text.empty()) continue;
    const auto comma = text.find(',');
    if (comma == std::string_view::npos) {
      throw FormatError("labels line " + std::to_string(line_no) + ": expected two fields");
    }
    const auto index = detail::parse_int<long long>(detail::trim(text.substr(0, comma)), line_no, "index");
    const auto label = detail::parse_int<long long>(detail::trim(text.substr(comma + 1)), line_no, "label");
    if (index < 0 || static_cast<std::size_t>(index) >= row_count) {
      throw InvalidArgument("labels line " + std::to_string(line_no) + ": index " + std::to_string(index) +
                            " out of range (matrix has " + std::to_string(row_count) + " rows)");
    }
    if (label < 0 || label >= num_classes) {
      throw InvalidArgument("labels line " + std::to_string(line_no) + ": label out of range (" +
                            std::to_string(label) + " not in [0, " + std::to_string(num_classes) + "))");
    }
    if (!seen.insert(static_cast<std::size_t>(index)).second) {
      throw InvalidArgument("labels line " + std::to_string(line_no) + ": duplicate index " +
                            std::to_string(index));
    }
    table.entries.push_back({static_cast<std::size_t>(index), static_cast<int>(label)});
  }
  return table;
}

inline LabelTable load_labels(const std::filesystem::path& path, const EmbeddingMatrix& matrix,
                              int num_classes) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  return parse_labels(in, matrix.count(), num_classes);
}

inline void save_labels(const LabelTable& table, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out << "index,label\n";
  for (const auto& e : table.entries) out << e.row_index << ',' << e.class_id << '\n';
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

}  // namespace gsp
