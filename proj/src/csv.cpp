#include "blindspot/csv.hpp"

#include <charconv>
#include <cmath>
#include <system_error>

#include "blindspot/error.hpp"

namespace blindspot::csv {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

[[noreturn]] void bad_number(std::string_view text, std::size_t line, std::string_view what) {
  throw Error(ErrorCode::ParseError, "line " + std::to_string(line) + ": invalid " +
                                         std::string(what) + " '" + std::string(text) + "'");
}

}  // namespace

std::string format_double(double value) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  if (ec != std::errc{}) throw Error(ErrorCode::IoError, "cannot format number");
  return std::string(buf, end);
}

double parse_double(std::string_view text, std::size_t line, std::string_view what) {
  text = trim(text);
  double value = 0.0;
  auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || end != text.data() + text.size() || !std::isfinite(value)) {
    bad_number(text, line, what);
  }
  return value;
}

std::int64_t parse_int(std::string_view text, std::size_t line, std::string_view what) {
  text = trim(text);
  std::int64_t value = 0;
  auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || end != text.data() + text.size()) bad_number(text, line, what);
  return value;
}

Reader::Reader(const std::filesystem::path& path) : path_(path), in_(path, std::ios::binary) {
  if (!in_) throw Error(ErrorCode::IoError, path.string() + ": cannot open for reading");
}

bool Reader::next_line(std::string& out) {
  while (std::getline(in_, out)) {
    ++line_;
    auto view = trim(out);
    if (view.empty()) continue;
    if (view.front() == '#') {
      view.remove_prefix(1);
      comments_.emplace_back(trim(view));
      continue;
    }
    out = std::string(view);
    return true;
  }
  if (in_.bad()) throw Error(ErrorCode::IoError, path_.string() + ": read failed");
  return false;
}

void Reader::expect_header(std::string_view expected) {
  std::string header;
  if (!next_line(header)) fail("missing header '" + std::string(expected) + "'");
  if (header.size() >= 3 && header.compare(0, 3, "\xEF\xBB\xBF") == 0) header.erase(0, 3);
  if (header != expected) {
    fail("expected header '" + std::string(expected) + "', got '" + header + "'");
  }
}

bool Reader::next(std::vector<std::string>& fields) {
  std::string row;
  if (!next_line(row)) return false;
  fields.clear();
  std::string_view rest = row;
  while (true) {
    auto comma = rest.find(',');
    fields.emplace_back(trim(rest.substr(0, comma)));
    if (comma == std::string_view::npos) break;
    rest.remove_prefix(comma + 1);
  }
  return true;
}

void Reader::fail(const std::string& reason) const {
  throw Error(ErrorCode::ParseError,
              path_.string() + ":" + std::to_string(line_) + ": " + reason);
}

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, path.string() + ": cannot open for writing");
  return out;
}

void finish_output(std::ofstream& out, const std::filesystem::path& path) {
  out.flush();
  if (!out) throw Error(ErrorCode::IoError, path.string() + ": write failed");
}

}  // namespace blindspot::csv
