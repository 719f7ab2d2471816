#include "adanapg/csv.hpp"

#include <fmt/format.h>

#include <charconv>
#include <sstream>

namespace adanapg {
namespace {

constexpr const char* kHashPrefix = "# config_hash=";

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double to_real(const std::string& s, const std::string& where) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) {
    throw CsvError(where + ": not a number: '" + s + "'");
  }
  return v;
}

}  // namespace

std::string format_real(double v) { return fmt::format("{:.17g}", v); }

std::string format_real(const std::optional<double>& v) { return v ? format_real(*v) : std::string(); }

CsvWriter::CsvWriter(const std::string& path, const std::string& config_hash,
                     const std::vector<std::string>& header)
    : path_(path), out_(path, std::ios::binary | std::ios::trunc), columns_(header.size()) {
  if (!out_) throw CsvError("cannot open " + path + " for writing");
  out_ << kHashPrefix << config_hash << '\n';
  row(header);
}

void CsvWriter::row(const std::vector<std::string>& fields) {
  if (fields.size() != columns_) throw CsvError(path_ + ": row width differs from header");
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out_ << ',';
    out_ << fields[i];
  }
  out_ << '\n';
}

void CsvWriter::close() {
  out_.close();
  if (out_.fail()) throw CsvError("failed writing " + path_);
}

std::size_t CsvTable::column(const std::string& name) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return i;
  }
  throw CsvError("missing column '" + name + "'");
}

CsvTable read_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CsvError("cannot open " + path);
  CsvTable table;
  std::string line;
  if (!std::getline(in, line) || line.rfind(kHashPrefix, 0) != 0) {
    throw CsvError(path + ": missing config hash line");
  }
  table.config_hash = line.substr(std::string(kHashPrefix).size());
  if (!std::getline(in, line)) throw CsvError(path + ": missing header");
  table.header = split(line);
  Index lineno = 2;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    auto fields = split(line);
    if (fields.size() != table.header.size()) {
      throw CsvError(path + ":" + std::to_string(lineno) + ": wrong number of fields");
    }
    table.rows.push_back(std::move(fields));
  }
  return table;
}

const std::vector<std::string>& trajectory_header() {
  static const std::vector<std::string> header{
      "run_id",   "iter",      "batch_size",  "cum_samples",   "objective",
      "dist_sq",  "gmap_norm", "test_rounds", "budget_capped", "elapsed_ns"};
  return header;
}

void write_trajectory(const std::string& path, const std::string& config_hash, Index run_id,
                      const std::vector<IterationRecord>& records) {
  CsvWriter w(path, config_hash, trajectory_header());
  for (const auto& r : records) {
    w.row({std::to_string(run_id), std::to_string(r.n), std::to_string(r.batch_size),
           std::to_string(r.cum_samples), format_real(r.objective), format_real(r.dist_sq),
           format_real(r.gmap_norm), std::to_string(r.test_rounds), r.budget_capped ? "1" : "0",
           r.elapsed_ns ? std::to_string(*r.elapsed_ns) : std::string()});
  }
  w.close();
}

void write_vectors(const std::string& path, const std::string& config_hash,
                   const std::vector<IterationRecord>& records, VectorField field) {
  const char* prefix = field == VectorField::iterate ? "x" : "w";
  auto pick = [field](const IterationRecord& r) -> const std::optional<Vector>& {
    return field == VectorField::iterate ? r.iterate : r.noise;
  };
  if (records.empty() || !pick(records.front())) throw CsvError(path + ": nothing recorded");
  const Index d = pick(records.front())->size();
  std::vector<std::string> header{"iter"};
  for (Index i = 0; i < d; ++i) header.push_back(fmt::format("{}_{}", prefix, i));
  CsvWriter w(path, config_hash, header);
  std::vector<std::string> fields(static_cast<std::size_t>(d + 1));
  for (const auto& r : records) {
    const auto& v = pick(r);
    if (!v || v->size() != d) throw CsvError(path + ": inconsistent vectors");
    fields[0] = std::to_string(r.n);
    for (Index i = 0; i < d; ++i) fields[static_cast<std::size_t>(i + 1)] = format_real((*v)(i));
    w.row(fields);
  }
  w.close();
}

void write_point(const std::string& path, const std::string& config_hash, const Vector& x) {
  CsvWriter w(path, config_hash, {"index", "value"});
  for (Index i = 0; i < x.size(); ++i) w.row({std::to_string(i), format_real(x(i))});
  w.close();
}

Vector read_point(const std::string& path) {
  const CsvTable t = read_csv(path);
  const std::size_t idx = t.column("index");
  const std::size_t val = t.column("value");
  Vector x(static_cast<Index>(t.rows.size()));
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto i = static_cast<Index>(to_real(t.rows[r][idx], path));
    if (i != static_cast<Index>(r)) throw CsvError(path + ": indices must run 0, 1, ...");
    x(i) = to_real(t.rows[r][val], path);
  }
  return x;
}

}  // namespace adanapg
