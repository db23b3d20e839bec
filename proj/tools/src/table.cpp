#include "toscca/cli/table.hpp"

#include <charconv>
#include <fstream>
#include <limits>
#include <optional>
#include <sstream>
#include <system_error>

#include <unistd.h>

namespace toscca::cli {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) {
    s.remove_prefix(1);
  }
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

// Splits one line, honouring double quotes ("" escapes a quote).
void split_line(std::string_view line, char delim, std::vector<std::string>& out) {
  out.clear();
  std::string field;
  bool quoted = false;
  for (size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == delim) {
      out.emplace_back(trim(field));
      field.clear();
    } else {
      field.push_back(c);
    }
  }
  out.emplace_back(trim(field));
}

std::optional<double> to_number(std::string_view s) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  if (s.empty()) return std::nullopt;
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

std::string location(const std::string& source, size_t line, size_t field) {
  std::ostringstream os;
  os << source << ": line " << line << ", field " << field;
  return os.str();
}

bool needs_quotes(std::string_view s, char delim) {
  return s.find(delim) != std::string_view::npos || s.find('"') != std::string_view::npos ||
         s.find('\n') != std::string_view::npos;
}

void append_field(std::string& out, std::string_view s, char delim) {
  if (!needs_quotes(s, delim)) {
    out.append(s);
    return;
  }
  out.push_back('"');
  for (char c : s) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
}

}  // namespace

RawMatrix parse_matrix(std::string_view text, const ReadOptions& options,
                       const std::string& source) {
  // Collect non-blank lines with their 1-based line numbers.
  std::vector<std::pair<size_t, std::string_view>> lines;
  size_t line_no = 0;
  while (!text.empty()) {
    const auto end = text.find('\n');
    std::string_view line = text.substr(0, end);
    text.remove_prefix(end == std::string_view::npos ? text.size() : end + 1);
    ++line_no;
    if (!trim(line).empty()) lines.emplace_back(line_no, line);
  }
  if (lines.empty()) throw InputError(source + ": no data");

  char delim = options.delimiter;
  if (delim == 0) {
    delim = lines.front().second.find('\t') != std::string_view::npos ? '\t' : ',';
  }

  std::vector<std::string> fields;
  split_line(lines.front().second, delim, fields);
  bool header = false;
  if (options.header == Detect::yes) {
    header = true;
  } else if (options.header == Detect::automatic) {
    for (size_t j = 1; j < fields.size(); ++j) header = header || !to_number(fields[j]);
    if (fields.size() == 1) header = !to_number(fields[0]);
  }
  std::vector<std::string> header_fields;
  if (header) header_fields = fields;
  const size_t first_data = header ? 1 : 0;
  if (first_data >= lines.size()) throw InputError(source + ": header but no data rows");

  split_line(lines[first_data].second, delim, fields);
  const size_t width = fields.size();
  bool header_short = header && header_fields.size() + 1 == width;
  if (header && !header_short && header_fields.size() != width) {
    throw InputError(source + ": header has " + std::to_string(header_fields.size()) +
                     " fields but line " + std::to_string(lines[first_data].first) + " has " +
                     std::to_string(width));
  }

  const size_t rows = lines.size() - first_data;
  std::vector<std::string> first_column(rows);
  std::vector<double> first_values(rows, 0.0);
  bool first_numeric = true;
  size_t first_bad = 0;
  Matrix rest(static_cast<Index>(rows), static_cast<Index>(width - 1));
  for (size_t i = 0; i < rows; ++i) {
    const auto [num, line] = lines[first_data + i];
    split_line(line, delim, fields);
    if (fields.size() != width) {
      throw InputError(source + ": line " + std::to_string(num) + " has " +
                       std::to_string(fields.size()) + " fields, expected " +
                       std::to_string(width));
    }
    if (auto v = to_number(fields[0])) {
      first_values[i] = *v;
    } else if (first_numeric) {
      first_numeric = false;
      first_bad = i;
    }
    first_column[i] = std::move(fields[0]);
    for (size_t j = 1; j < width; ++j) {
      const auto v = to_number(fields[j]);
      if (!v) {
        throw InputError(location(source, num, j + 1) + ": cannot parse '" + fields[j] +
                         "' as a number");
      }
      rest(static_cast<Index>(i), static_cast<Index>(j - 1)) = *v;
    }
  }

  bool ids = false;
  if (options.row_ids == Detect::yes) {
    ids = true;
  } else if (options.row_ids == Detect::automatic) {
    ids = !first_numeric || header_short || (header && header_fields.front().empty());
  } else if (!first_numeric) {
    throw InputError(location(source, lines[first_data + first_bad].first, 1) +
                     ": cannot parse '" + first_column[first_bad] + "' as a number");
  }
  if (!ids && header_short) {
    throw InputError(source + ": header is one field short of the data rows");
  }

  RawMatrix out;
  if (ids) {
    out.values = std::move(rest);
    out.row_ids = std::move(first_column);
    if (header) {
      out.column_names.assign(header_fields.begin() + (header_short ? 0 : 1), header_fields.end());
    }
  } else {
    out.values.resize(static_cast<Index>(rows), static_cast<Index>(width));
    for (size_t i = 0; i < rows; ++i) out.values(static_cast<Index>(i), 0) = first_values[i];
    out.values.rightCols(static_cast<Index>(width - 1)) = rest;
    if (header) out.column_names = std::move(header_fields);
  }

  if (options.transpose) {
    out.values.transposeInPlace();
    std::swap(out.row_ids, out.column_names);
  }
  if (out.cols() == 0) throw InputError(source + ": no numeric columns");
  try {
    out.validate();
  } catch (const InputError&) {
    throw;
  } catch (const Error& e) {
    throw InputError(source + ": " + e.what());
  }
  return out;
}

RawMatrix read_matrix(const std::filesystem::path& path, const ReadOptions& options) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path.string());
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return parse_matrix(text, options, path.string());
}

std::string format_number(double value) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  if (ec != std::errc()) throw Error("number formatting failed");
  return std::string(buf, ptr);
}

Table::Table(std::vector<std::string> columns, char delimiter)
    : columns_(columns.size()), delimiter_(delimiter) {
  for (const auto& c : columns) cell(std::string_view(c));
  end_row();
}

void Table::separator() {
  if (filled_ > 0) text_.push_back(delimiter_);
  ++filled_;
}

Table& Table::cell(std::string_view text) {
  separator();
  append_field(text_, text, delimiter_);
  return *this;
}

Table& Table::cell(double value) {
  separator();
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  if (ec != std::errc()) throw Error("number formatting failed");
  text_.append(buf, ptr);
  return *this;
}

Table& Table::cell(long long value) {
  separator();
  text_ += std::to_string(value);
  return *this;
}

void Table::end_row() {
  if (filled_ != columns_) {
    throw Error("table row has " + std::to_string(filled_) + " cells, expected " +
                std::to_string(columns_));
  }
  text_.push_back('\n');
  filled_ = 0;
}

std::string format_matrix(const RawMatrix& matrix, char delimiter) {
  std::vector<std::string> columns{"id"};
  for (Index j = 0; j < matrix.cols(); ++j) {
    columns.push_back(matrix.column_names.empty() ? "v" + std::to_string(j + 1)
                                                  : matrix.column_names[static_cast<size_t>(j)]);
  }
  Table table(std::move(columns), delimiter);
  for (Index i = 0; i < matrix.rows(); ++i) {
    table.cell(matrix.row_ids.empty() ? "r" + std::to_string(i + 1)
                                      : matrix.row_ids[static_cast<size_t>(i)]);
    for (Index j = 0; j < matrix.cols(); ++j) table.cell(matrix.values(i, j));
    table.end_row();
  }
  return table.text();
}

void write_file_atomic(const std::filesystem::path& path, std::string_view contents) {
  auto tmp = path;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + tmp.string());
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out.flush()) throw Error("write failed for " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw Error("cannot move output into place: " + path.string());
  }
}

}  // namespace toscca::cli
