#pragma once

// CSV run reports. Every command writes its traces and assignments into a
// report directory; wall-clock timings go to a separate timings.csv so the
// remaining files are byte-identical across reruns with the same seed.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

namespace vhem::cli {

class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header);

  CsvWriter& cell(const std::string& value);
  CsvWriter& cell(double value);
  CsvWriter& cell(long long value);
  CsvWriter& cell(int value) { return cell(static_cast<long long>(value)); }
  CsvWriter& cell(std::size_t value) { return cell(static_cast<long long>(value)); }
  void end_row();

 private:
  std::ofstream out_;
  std::filesystem::path path_;
  bool row_started_ = false;
};

/// Shortest decimal form that parses back to the same double.
std::string format_double(double value);

class Timings {
 public:
  void start(const std::string& phase);
  void stop();
  void write(const std::filesystem::path& dir) const;

 private:
  using Clock = std::chrono::steady_clock;
  std::vector<std::pair<std::string, double>> entries_;
  std::string current_;
  Clock::time_point started_;
};

void write_trace(const std::filesystem::path& path, const std::string& column,
                 const std::vector<double>& values);

}  // namespace vhem::cli
