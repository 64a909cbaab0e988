#include "cbpscan/seqdata.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <utility>

#include "cbpscan/common.hpp"

namespace cbpscan::seqdata {

namespace {

std::string location(const std::string& path, std::size_t line, std::size_t col) {
  return path + ":" + std::to_string(line) + ":" + std::to_string(col);
}

// Strips spaces/tabs and a trailing carriage return (files written on
// Windows), returning a trimmed view into the line.
std::string_view trim(std::string_view field) {
  while (!field.empty() && (field.front() == ' ' || field.front() == '\t')) {
    field.remove_prefix(1);
  }
  while (!field.empty() &&
         (field.back() == ' ' || field.back() == '\t' || field.back() == '\r')) {
    field.remove_suffix(1);
  }
  return field;
}

bool parse_double(std::string_view field, double* out) {
  const char* begin = field.data();
  const char* end = begin + field.size();
  const auto result = std::from_chars(begin, end, *out);
  return result.ec == std::errc{} && result.ptr == end;
}

std::vector<std::string_view> split_fields(const std::string& line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  for (;;) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string::npos) {
      fields.push_back(trim(std::string_view(line).substr(start)));
      break;
    }
    fields.push_back(trim(std::string_view(line).substr(start, comma - start)));
    start = comma + 1;
  }
  return fields;
}

// Reads a numeric CSV table. Blank lines are skipped; a first line whose
// first field is not numeric is treated as a header. Every kept row must have
// the same number of fields, all numeric.
std::vector<std::vector<double>> load_numeric_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw InputError("cannot open " + path);
  }
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t line_no = 0;
  bool saw_data = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split_fields(line);
    std::vector<double> row;
    row.reserve(fields.size());
    bool ok = true;
    for (std::size_t c = 0; c < fields.size(); ++c) {
      double value;
      if (fields[c].empty() || !parse_double(fields[c], &value)) {
        if (!saw_data && c == 0) {
          ok = false;  // header line, skip it
          break;
        }
        throw InputError(location(path, line_no, c + 1) + ": expected a number, got \"" +
                         std::string(fields[c]) + "\"");
      }
      row.push_back(value);
    }
    if (!ok) continue;
    if (saw_data && row.size() != rows.back().size()) {
      throw InputError(location(path, line_no, 1) + ": row has " +
                       std::to_string(row.size()) + " fields, expected " +
                       std::to_string(rows.back().size()));
    }
    rows.push_back(std::move(row));
    saw_data = true;
  }
  if (rows.empty()) {
    throw InputError(path + ": no data rows");
  }
  return rows;
}

}  // namespace

Metric parse_metric(const std::string& name) {
  if (name == "euclidean" || name == "l2") return Metric::kEuclidean;
  if (name == "l1" || name == "manhattan") return Metric::kL1;
  throw InputError("unknown metric \"" + name + "\" (euclidean, l1)");
}

Sequence load_csv_rows(const std::string& path) {
  const auto rows = load_numeric_table(path);
  Sequence seq;
  seq.n = rows.size();
  seq.dim = rows.front().size();
  seq.values.reserve(seq.n * seq.dim);
  for (const auto& row : rows) {
    seq.values.insert(seq.values.end(), row.begin(), row.end());
  }
  return seq;
}

DistanceMatrix load_distance_matrix(const std::string& path) {
  const auto rows = load_numeric_table(path);
  const std::size_t n = rows.size();
  if (rows.front().size() != n) {
    throw InputError(path + ": distance matrix must be square, got " +
                     std::to_string(n) + "x" + std::to_string(rows.front().size()));
  }
  DistanceMatrix dist;
  dist.n = n;
  dist.values.resize(n * n);
  double max_abs = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const double value = rows[i][j];
      if (!std::isfinite(value)) {
        throw InputError(path + ": non-finite distance at row " + std::to_string(i + 1) +
                         ", column " + std::to_string(j + 1));
      }
      if (value < 0.0) {
        throw InputError(path + ": negative distance at row " + std::to_string(i + 1) +
                         ", column " + std::to_string(j + 1));
      }
      dist.values[i * n + j] = value;
      max_abs = std::max(max_abs, std::abs(value));
    }
  }
  const double tol = 1e-8 * std::max(1.0, max_abs);
  for (std::size_t i = 0; i < n; ++i) {
    if (std::abs(dist.at(i, i)) > tol) {
      throw InputError(path + ": nonzero diagonal at row " + std::to_string(i + 1));
    }
    for (std::size_t j = i + 1; j < n; ++j) {
      if (std::abs(dist.at(i, j) - dist.at(j, i)) > tol) {
        throw InputError(path + ": asymmetric at rows " + std::to_string(i + 1) + "," +
                         std::to_string(j + 1));
      }
    }
  }
  return dist;
}

std::vector<std::pair<int, int>> load_edge_list(const std::string& path,
                                                std::size_t n_nodes) {
  const auto rows = load_numeric_table(path);
  if (rows.front().size() != 2) {
    throw InputError(path + ": edge list needs exactly 2 columns, got " +
                     std::to_string(rows.front().size()));
  }
  std::vector<std::pair<int, int>> edges;
  edges.reserve(rows.size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    int ends[2];
    for (int c = 0; c < 2; ++c) {
      const double value = rows[r][static_cast<std::size_t>(c)];
      const double rounded = std::nearbyint(value);
      if (value != rounded || rounded < 1.0 ||
          rounded > static_cast<double>(n_nodes)) {
        throw InputError(path + ": row " + std::to_string(r + 1) +
                         ": node index must be an integer in [1, " +
                         std::to_string(n_nodes) + "]");
      }
      ends[c] = static_cast<int>(rounded) - 1;
    }
    if (ends[0] == ends[1]) {
      throw InputError(path + ": row " + std::to_string(r + 1) + ": self loop");
    }
    edges.emplace_back(std::min(ends[0], ends[1]), std::max(ends[0], ends[1]));
  }
  auto sorted = edges;
  std::sort(sorted.begin(), sorted.end());
  const auto dup = std::adjacent_find(sorted.begin(), sorted.end());
  if (dup != sorted.end()) {
    throw InputError(path + ": duplicate edge (" + std::to_string(dup->first + 1) +
                     "," + std::to_string(dup->second + 1) + ")");
  }
  return edges;
}

DistanceMatrix pairwise_distances(const Sequence& seq, Metric metric) {
  DistanceMatrix dist;
  dist.n = seq.n;
  dist.values.assign(seq.n * seq.n, 0.0);
  for (std::size_t i = 0; i < seq.n; ++i) {
    for (std::size_t j = i + 1; j < seq.n; ++j) {
      double acc = 0.0;
      for (std::size_t k = 0; k < seq.dim; ++k) {
        const double diff = seq.at(i, k) - seq.at(j, k);
        acc += metric == Metric::kEuclidean ? diff * diff : std::abs(diff);
      }
      const double d = metric == Metric::kEuclidean ? std::sqrt(acc) : acc;
      dist.at(i, j) = d;
      dist.at(j, i) = d;
    }
  }
  return dist;
}

Augmentation augment_length(std::size_t n_raw, int L) {
  if (L < 1) {
    throw InputError("block length must be >= 1, got " + std::to_string(L));
  }
  if (n_raw < 2) {
    throw InputError("need at least 2 observations, got " + std::to_string(n_raw));
  }
  Augmentation info;
  info.L = L;
  const int rem = static_cast<int>(n_raw % static_cast<std::size_t>(L));
  info.x_aug = rem == 0 ? 0 : L - rem;
  info.n = static_cast<int>(n_raw) + info.x_aug;
  info.m = info.n / L;
  return info;
}

Sequence augment(const Sequence& seq, int L, Augmentation* info) {
  const Augmentation aug = augment_length(seq.n, L);
  if (info != nullptr) *info = aug;
  if (aug.x_aug == 0) return seq;
  Sequence out = seq;
  out.n = static_cast<std::size_t>(aug.n);
  out.values.resize(out.n * out.dim, std::numeric_limits<double>::quiet_NaN());
  return out;
}

}  // namespace cbpscan::seqdata
