#ifndef ADANAPG_CSV_HPP
#define ADANAPG_CSV_HPP

#include <cstdint>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "adanapg/core.hpp"
#include "adanapg/solver.hpp"

namespace adanapg {

struct CsvError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// 17 significant digits, round-trip exact.
std::string format_real(double v);
std::string format_real(const std::optional<double>& v);

/// Writes `# config_hash=<hex>`, the header row, then rows; LF endings.
class CsvWriter {
 public:
  CsvWriter(const std::string& path, const std::string& config_hash,
            const std::vector<std::string>& header);

  void row(const std::vector<std::string>& fields);
  void close();

 private:
  std::string path_;
  std::ofstream out_;
  std::size_t columns_;
};

struct CsvTable {
  std::string config_hash;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  /// Column position by name; throws CsvError when absent.
  std::size_t column(const std::string& name) const;
};

CsvTable read_csv(const std::string& path);

/// run_id, iter, batch_size, cum_samples, objective, dist_sq, gmap_norm,
/// test_rounds, budget_capped, elapsed_ns
const std::vector<std::string>& trajectory_header();

void write_trajectory(const std::string& path, const std::string& config_hash, Index run_id,
                      const std::vector<IterationRecord>& records);

/// iter, x_0 .. x_{d-1} for iterates or iter, w_0 .. w_{d-1} for noise.
enum class VectorField { iterate, noise };
void write_vectors(const std::string& path, const std::string& config_hash,
                   const std::vector<IterationRecord>& records, VectorField field);

/// index, value
void write_point(const std::string& path, const std::string& config_hash, const Vector& x);
Vector read_point(const std::string& path);

}  // namespace adanapg

#endif
