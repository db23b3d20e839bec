#pragma once

// Delimited text in and out. Numbers are written in the shortest form that
// reads back to the same double, always with '.' as decimal separator.

#include "toscca/core.hpp"

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace toscca::cli {

class UsageError : public Error {
 public:
  using Error::Error;
};

class InputError : public Error {
 public:
  using Error::Error;
};

enum class Detect { automatic, yes, no };

struct ReadOptions {
  char delimiter = 0;  // 0: tab when the first line has one, comma otherwise
  Detect header = Detect::automatic;
  Detect row_ids = Detect::automatic;
  bool transpose = false;  // file is variables x samples
};

/// Parses a numeric block. Automatic header: the first line is a header when
/// any field after the first does not parse as a number. Automatic row ids:
/// the first column holds ids when any of its cells is non-numeric, or when
/// the header's first field is empty or the header is one field short.
RawMatrix parse_matrix(std::string_view text, const ReadOptions& options,
                       const std::string& source);
RawMatrix read_matrix(const std::filesystem::path& path, const ReadOptions& options);

std::string format_number(double value);

/// Row-oriented table builder.
class Table {
 public:
  Table(std::vector<std::string> columns, char delimiter = ',');

  Table& cell(std::string_view text);
  Table& cell(const char* text) { return cell(std::string_view(text)); }
  Table& cell(const std::string& text) { return cell(std::string_view(text)); }
  Table& cell(double value);
  Table& cell(long long value);
  Table& cell(int value) { return cell(static_cast<long long>(value)); }
  Table& cell(Index value) { return cell(static_cast<long long>(value)); }
  Table& cell(bool value) { return cell(std::string_view(value ? "true" : "false")); }
  void end_row();

  const std::string& text() const { return text_; }

 private:
  void separator();

  size_t columns_;
  size_t filled_ = 0;
  char delimiter_;
  std::string text_;
};

/// Header `id,<column names>` (or `id` alone when unnamed) and one line per row.
std::string format_matrix(const RawMatrix& matrix, char delimiter = ',');

/// Writes through a temporary file in the same directory and renames it
/// into place.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

}  // namespace toscca::cli
