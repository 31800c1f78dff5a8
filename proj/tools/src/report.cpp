#include "report.hpp"

#include <charconv>

#include "vhem/errors.hpp"

namespace vhem::cli {

std::string format_double(double value) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, res.ptr);
}

CsvWriter::CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header)
    : out_(path), path_(path) {
  if (!out_) throw ValidationError("cannot open report '" + path.string() + "' for writing");
  for (const auto& h : header) cell(h);
  end_row();
}

CsvWriter& CsvWriter::cell(const std::string& value) {
  if (row_started_) out_ << ',';
  if (value.find_first_of(",\"\n") != std::string::npos) {
    out_ << '"';
    for (char c : value) out_ << (c == '"' ? std::string("\"\"") : std::string(1, c));
    out_ << '"';
  } else {
    out_ << value;
  }
  row_started_ = true;
  return *this;
}

CsvWriter& CsvWriter::cell(double value) { return cell(format_double(value)); }

CsvWriter& CsvWriter::cell(long long value) { return cell(std::to_string(value)); }

void CsvWriter::end_row() {
  out_ << '\n';
  row_started_ = false;
  if (!out_) throw ValidationError("failed writing report '" + path_.string() + "'");
}

void Timings::start(const std::string& phase) {
  current_ = phase;
  started_ = Clock::now();
}

void Timings::stop() {
  entries_.emplace_back(current_, std::chrono::duration<double>(Clock::now() - started_).count());
}

void Timings::write(const std::filesystem::path& dir) const {
  CsvWriter csv(dir / "timings.csv", {"phase", "seconds"});
  for (const auto& [phase, secs] : entries_) {
    csv.cell(phase).cell(secs);
    csv.end_row();
  }
}

void write_trace(const std::filesystem::path& path, const std::string& column,
                 const std::vector<double>& values) {
  CsvWriter csv(path, {"iteration", column});
  for (std::size_t k = 0; k < values.size(); ++k) {
    csv.cell(k).cell(values[k]);
    csv.end_row();
  }
}

}  // namespace vhem::cli
