#pragma once

#include <initializer_list>
#include <ostream>
#include <string>
#include <string_view>

namespace entropic {

// Shortest round-trip text for a double (17 significant digits).
std::string format_double(double v);

/// Minimal CSV writer: one versioned comment line, a header row, then rows.
class CsvWriter {
 public:
  CsvWriter(std::ostream& out, std::string_view schema, int version, std::initializer_list<std::string_view> columns);

  CsvWriter& cell(double v);
  CsvWriter& cell(long long v);
  CsvWriter& cell(std::size_t v) { return cell(static_cast<long long>(v)); }
  CsvWriter& cell(std::string_view v);
  void end_row();

 private:
  void separator();

  std::ostream& out_;
  bool row_started_ = false;
};

}  // namespace entropic
