#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <string_view>
#include <vector>

namespace blindspot::csv {

/// Shortest decimal text that parses back to the same double.
std::string format_double(double value);

double parse_double(std::string_view text, std::size_t line, std::string_view what);
std::int64_t parse_int(std::string_view text, std::size_t line, std::string_view what);

/// Line-oriented reader for the simple comma-separated formats used here:
/// no quoting, '#' starts a comment line, blank lines are skipped.
class Reader {
 public:
  explicit Reader(const std::filesystem::path& path);

  /// Reads the header row and checks it matches `expected` exactly.
  void expect_header(std::string_view expected);

  /// Next data row split on commas; false at end of file.
  bool next(std::vector<std::string>& fields);

  /// Comment lines seen so far, without the leading '#'.
  const std::vector<std::string>& comments() const noexcept { return comments_; }

  std::size_t line() const noexcept { return line_; }
  const std::filesystem::path& path() const noexcept { return path_; }

  [[noreturn]] void fail(const std::string& reason) const;

 private:
  bool next_line(std::string& out);

  std::filesystem::path path_;
  std::ifstream in_;
  std::size_t line_ = 0;
  std::vector<std::string> comments_;
};

/// Opens `path` for writing in binary mode (LF endings everywhere).
std::ofstream open_output(const std::filesystem::path& path);

/// Flushes and reports write failures as IoError.
void finish_output(std::ofstream& out, const std::filesystem::path& path);

}  // namespace blindspot::csv
