// Verifies the streaming contract of the preamble reader: peak memory stays
// bounded while scanning a file two orders of magnitude larger. Runs as its
// own binary so the process RSS baseline belongs to this test alone.

#include <sys/resource.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include "rffp/dataset_io.hpp"

namespace fs = std::filesystem;

namespace {

long max_rss_kib() {
  rusage usage{};
  getrusage(RUSAGE_SELF, &usage);
  return usage.ru_maxrss;
}

}  // namespace

int main() {
  const fs::path dir = fs::temp_directory_path() / "rffp_streaming_test";
  fs::remove_all(dir);
  fs::create_directories(dir);
  const fs::path csv = dir / "large_pre.csv";

  // ~50k rows x 288 compact literals ~= 110 MiB.
  const std::size_t rows = 50000;
  {
    std::ofstream out(csv, std::ios::binary);
    out << "mac_address,preamble\n";
    std::string cell = "\"[";
    for (int i = 0; i < 288; ++i) {
      if (i) cell += ',';
      cell += "(0.5,-0.5)";
    }
    cell += "]\"";
    for (std::size_t r = 0; r < rows; ++r)
      out << "02:00:00:00:00:01," << cell << '\n';
  }
  const auto file_size = fs::file_size(csv);

  const long baseline_kib = max_rss_kib();
  std::size_t records = 0;
  rffp::ReadStats stats = rffp::read_preambles(
      csv, {}, rffp::ParseMode::kStrict,
      [&](rffp::PreambleRecord&& rec) { records += rec.samples.size() ? 1 : 0; });
  const long peak_kib = max_rss_kib();
  const long growth_kib = peak_kib - baseline_kib;

  std::printf("file %.1f MiB, %zu records, rss baseline %ld KiB, growth %ld KiB\n",
              file_size / 1048576.0, records, baseline_kib, growth_kib);
  fs::remove_all(dir);

  if (records != rows || !stats.errors.empty()) {
    std::printf("FAIL: wrong record/error count\n");
    return 1;
  }
  // A streaming reader needs row-sized buffers only; allow a generous margin
  // that is still far below the file size.
  if (growth_kib > 32 * 1024) {
    std::printf("FAIL: memory grew with file size\n");
    return 1;
  }
  std::printf("PASS\n");
  return 0;
}
