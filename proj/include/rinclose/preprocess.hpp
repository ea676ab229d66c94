#pragma once

#include <rinclose/core.hpp>

#include <cmath>
#include <numeric>
#include <random>

namespace rinclose {

// ---------------------------------------------------------------------------
// Equal-width binning
// ---------------------------------------------------------------------------

struct BinningRule {
  enum class Kind { scott, fd, sturges, sqrt, fixed_width, fixed_count };
  Kind kind = Kind::fd;
  double param = 0.0;  // width for fixed_width, bin count for fixed_count
  /// Left edge of the first bin; defaults to the column minimum.
  std::optional<double> origin;

  static BinningRule of(Kind k, double param = 0.0) { return {k, param, std::nullopt}; }
  static BinningRule fixed_width(double w, std::optional<double> origin = std::nullopt) {
    return {Kind::fixed_width, w, origin};
  }
  static BinningRule fixed_count(std::size_t k) { return of(Kind::fixed_count, static_cast<double>(k)); }

  /// Accepts "scott", "fd", "sturges", "sqrt", "width:W" and "count:K",
  /// optionally followed by "@ORIGIN" (e.g. "width:5@1").
  static BinningRule parse(std::string_view s) {
    if (auto at = s.find('@'); at != std::string_view::npos) {
      BinningRule r = parse(s.substr(0, at));
      std::string o(s.substr(at + 1));
      std::size_t used = 0;
      try {
        r.origin = std::stod(o, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used == 0 || used != o.size()) throw ConfigError("bad binning origin '" + o + "'");
      return r;
    }
    if (s == "scott") return of(Kind::scott);
    if (s == "fd") return of(Kind::fd);
    if (s == "sturges") return of(Kind::sturges);
    if (s == "sqrt") return of(Kind::sqrt);
    auto number = [&](std::string_view prefix) -> std::optional<double> {
      if (!s.starts_with(prefix)) return std::nullopt;
      std::string rest(s.substr(prefix.size()));
      std::size_t used = 0;
      double v = 0;
      try {
        v = std::stod(rest, &used);
      } catch (const std::exception&) {
        throw ConfigError("bad binning rule '" + std::string(s) + "'");
      }
      if (used != rest.size() || !(v > 0)) throw ConfigError("bad binning rule '" + std::string(s) + "'");
      return v;
    };
    if (auto w = number("width:")) return fixed_width(*w);
    if (auto k = number("count:")) {
      if (*k != std::floor(*k)) throw ConfigError("bin count must be an integer");
      return fixed_count(static_cast<std::size_t>(*k));
    }
    throw ConfigError("unknown binning rule '" + std::string(s) + "'");
  }

  std::string to_string() const {
    if (origin) {
      BinningRule plain = *this;
      plain.origin.reset();
      return plain.to_string() + "@" + format_number(*origin);
    }
    switch (kind) {
      case Kind::scott: return "scott";
      case Kind::fd: return "fd";
      case Kind::sturges: return "sturges";
      case Kind::sqrt: return "sqrt";
      case Kind::fixed_width: return "width:" + format_number(param);
      case Kind::fixed_count: return "count:" + format_number(param);
    }
    return "fd";
  }

 private:
  static std::string format_number(double v) {
    std::string s = std::to_string(v);
    s.erase(s.find_last_not_of('0') + 1);
    if (s.back() == '.') s.pop_back();
    return s;
  }
};

/// Fitted bins of one column: bin b (1-based) covers [lo + (b-1)w, lo + bw).
/// The last bin also takes everything up to the column maximum.
struct ColumnBinning {
  double lo = 0.0;
  double width = 0.0;
  std::size_t bins = 1;
  /// Categorical columns keep their codes as bin indices.
  bool passthrough = false;

  std::vector<double> edges() const {
    std::vector<double> e(bins + 1);
    for (std::size_t b = 0; b <= bins; ++b) e[b] = lo + static_cast<double>(b) * width;
    return e;
  }

  /// 1-based bin of v; values outside the fitted range go to the nearest end bin.
  std::size_t bin_of(double v, bool* clamped = nullptr) const {
    if (passthrough) return static_cast<std::size_t>(std::llround(v));
    if (width <= 0.0) {
      if (clamped && v != lo) *clamped = true;
      return 1;
    }
    double pos = std::floor((v - lo) / width);
    if (pos < 0) {
      if (clamped) *clamped = true;
      return 1;
    }
    if (pos >= static_cast<double>(bins)) {
      if (clamped && v > lo + static_cast<double>(bins) * width) *clamped = true;
      return bins;
    }
    return static_cast<std::size_t>(pos) + 1;
  }
};

struct BinningSpec {
  BinningRule rule;
  std::vector<ColumnBinning> columns;
  std::vector<std::string> warnings;
};

namespace detail {

/// Percentile with linear interpolation between closest ranks (sorted input).
inline double percentile_sorted(std::span<const double> v, double q) {
  double pos = q * static_cast<double>(v.size() - 1);
  std::size_t below = static_cast<std::size_t>(std::floor(pos));
  std::size_t above = std::min(below + 1, v.size() - 1);
  double frac = pos - static_cast<double>(below);
  return v[below] + (v[above] - v[below]) * frac;
}

}  // namespace detail

/// Fits equal-width bins to the non-missing values of one column.
///
/// Count rules (sturges, sqrt, fixed_count) split [min, max] into k bins.
/// Width rules (scott, fd, fixed_width) start at the minimum and use as many
/// bins as needed to reach the maximum. A zero-spread column gets one bin.
inline ColumnBinning fit_binning(std::span<const double> values, BinningRule rule,
                                 std::vector<std::string>* warnings = nullptr) {
  using K = BinningRule::Kind;
  if (values.empty()) throw DataError("cannot fit bins to a column without values");
  std::vector<double> v(values.begin(), values.end());
  std::sort(v.begin(), v.end());
  if (rule.origin && *rule.origin > v.front())
    throw ConfigError("binning origin lies above the column minimum");
  const double lo = rule.origin.value_or(v.front());
  const double range = v.back() - lo;
  const double n = static_cast<double>(v.size());

  ColumnBinning out;
  out.lo = lo;
  if (range == 0.0) {
    if (warnings) warnings->push_back("zero-spread column, using a single bin");
    return out;
  }

  auto by_count = [&](double k) {
    out.bins = static_cast<std::size_t>(std::max(1.0, k));
    out.width = range / static_cast<double>(out.bins);
  };
  auto by_width = [&](double w) {
    out.width = w;
    out.bins = static_cast<std::size_t>(std::floor(range / w)) + 1;
  };
  auto sturges = [&] { by_count(std::ceil(std::log2(n)) + 1); };

  switch (rule.kind) {
    case K::sturges:
      sturges();
      break;
    case K::sqrt:
      by_count(std::ceil(std::sqrt(n)));
      break;
    case K::fixed_count:
      if (rule.param < 1) throw ConfigError("bin count must be >= 1");
      by_count(rule.param);
      break;
    case K::fixed_width:
      if (!(rule.param > 0)) throw ConfigError("bin width must be > 0");
      by_width(rule.param);
      break;
    case K::scott: {
      double mean = std::accumulate(v.begin(), v.end(), 0.0) / n;
      double ss = 0;
      for (double x : v) ss += (x - mean) * (x - mean);
      by_width(3.5 * std::sqrt(ss / n) * std::pow(n, -1.0 / 3.0));
      break;
    }
    case K::fd: {
      double iqr = detail::percentile_sorted(v, 0.75) - detail::percentile_sorted(v, 0.25);
      if (iqr > 0) {
        by_width(2.0 * iqr * std::pow(n, -1.0 / 3.0));
      } else {
        if (warnings) warnings->push_back("zero IQR, falling back to sturges");
        sturges();
      }
      break;
    }
  }
  return out;
}

/// Fits `rule` to every numeric column; categorical columns pass their codes through.
inline BinningSpec fit_binning(const Matrix& mat, BinningRule rule) {
  BinningSpec spec;
  spec.rule = rule;
  for (std::size_t j = 0; j < mat.cols(); ++j) {
    if (is_categorical(mat.kind(j))) {
      ColumnBinning c;
      c.passthrough = true;
      c.lo = 1;
      c.width = 1;
      double top = 1;
      auto col = mat.column(j);
      auto miss = mat.missing_column(j);
      for (std::size_t i = 0; i < mat.rows(); ++i)
        if (!miss[i]) top = std::max(top, col[i]);
      c.bins = std::max(mat.levels(j).size(), static_cast<std::size_t>(top));
      spec.columns.push_back(c);
      continue;
    }
    std::vector<double> vals;
    auto col = mat.column(j);
    auto miss = mat.missing_column(j);
    for (std::size_t i = 0; i < mat.rows(); ++i)
      if (!miss[i]) vals.push_back(col[i]);
    std::vector<std::string> w;
    spec.columns.push_back(fit_binning(vals, rule, &w));
    for (auto& msg : w) spec.warnings.push_back(mat.name(j) + ": " + msg);
  }
  return spec;
}

/// Per-column eps matching a binning: the bin width for numeric columns, 0 for categorical.
inline std::vector<double> eps_from_binning(const BinningSpec& spec) {
  std::vector<double> eps;
  for (const auto& c : spec.columns) eps.push_back(c.passthrough ? 0.0 : c.width);
  return eps;
}

/// Replaces each value by its 1-based bin. `clamped`, when given, counts
/// values that fell outside the fitted range.
inline Matrix partition(const Matrix& mat, const BinningSpec& spec, std::size_t* clamped = nullptr) {
  if (spec.columns.size() != mat.cols()) throw ConfigError("binning spec does not match matrix width");
  Matrix out(mat.rows(), mat.cols());
  std::size_t outside = 0;
  for (std::size_t j = 0; j < mat.cols(); ++j) {
    out.set_name(j, mat.name(j));
    out.set_kind(j, is_categorical(mat.kind(j)) ? mat.kind(j) : ColumnKind::discrete);
    out.set_levels(j, mat.levels(j));
    for (std::size_t i = 0; i < mat.rows(); ++i) {
      if (mat.missing(i, j)) {
        out.set_missing(i, j);
        continue;
      }
      bool c = false;
      out.set(i, j, static_cast<double>(spec.columns[j].bin_of(mat.value(i, j), &c)));
      outside += c;
    }
  }
  if (clamped) *clamped = outside;
  return out;
}

// ---------------------------------------------------------------------------
// Itemization
// ---------------------------------------------------------------------------

namespace detail {

inline std::vector<std::size_t> observed_bins(const Matrix& discrete) {
  std::vector<std::size_t> bins(discrete.cols(), 1);
  for (std::size_t j = 0; j < discrete.cols(); ++j)
    for (std::size_t i = 0; i < discrete.rows(); ++i)
      if (!discrete.missing(i, j)) {
        double v = discrete.value(i, j);
        if (v < 1 || v != std::floor(v)) throw DataError("column '" + discrete.name(j) + "' does not hold bin indices");
        bins[j] = std::max(bins[j], static_cast<std::size_t>(v));
      }
  return bins;
}

inline Matrix item_matrix(const Matrix& discrete, const std::vector<std::size_t>& bins) {
  std::size_t total = std::accumulate(bins.begin(), bins.end(), std::size_t{0});
  Matrix out(discrete.rows(), total);
  std::size_t item = 0;
  for (std::size_t j = 0; j < discrete.cols(); ++j)
    for (std::size_t b = 1; b <= bins[j]; ++b) {
      out.set_kind(item, ColumnKind::nominal);
      out.set_name(item++, discrete.name(j) + ":" + std::to_string(b));
    }
  return out;
}

}  // namespace detail

/// One binary column per (column, bin): cell is 1 when the row's value falls in that bin.
/// `bins_per_column` defaults to the largest bin index seen in each column.
inline Matrix itemize(const Matrix& discrete, std::vector<std::size_t> bins_per_column = {}) {
  auto observed = detail::observed_bins(discrete);
  if (bins_per_column.empty()) bins_per_column = observed;
  if (bins_per_column.size() != discrete.cols()) throw ConfigError("bins_per_column does not match matrix width");
  for (std::size_t j = 0; j < discrete.cols(); ++j) bins_per_column[j] = std::max(bins_per_column[j], observed[j]);

  Matrix out = detail::item_matrix(discrete, bins_per_column);
  std::size_t base = 0;
  for (std::size_t j = 0; j < discrete.cols(); ++j) {
    for (std::size_t i = 0; i < discrete.rows(); ++i)
      if (!discrete.missing(i, j)) out.set(i, base + static_cast<std::size_t>(discrete.value(i, j)) - 1, 1.0);
    base += bins_per_column[j];
  }
  return out;
}

/// Itemization that also sets the neighbouring bin's item when the original
/// value lies within `delta` of that bin. The nearest value of the lower
/// neighbour is its upper edge minus the column resolution (1 for integer
/// columns, 0 otherwise); for the upper neighbour it is its lower edge.
/// Without `delta`, each column uses floor((width - 1) / 2).
inline Matrix itemize_multi(const Matrix& discrete, const Matrix& original, const BinningSpec& spec,
                            std::optional<double> delta = std::nullopt) {
  if (discrete.rows() != original.rows() || discrete.cols() != original.cols() ||
      spec.columns.size() != original.cols())
    throw ConfigError("itemize_multi inputs disagree in shape");
  std::vector<std::size_t> bins(spec.columns.size());
  for (std::size_t j = 0; j < bins.size(); ++j) bins[j] = spec.columns[j].bins;
  Matrix out = itemize(discrete, bins);
  auto observed = detail::observed_bins(discrete);

  std::size_t base = 0;
  for (std::size_t j = 0; j < original.cols(); ++j) {
    const ColumnBinning& cb = spec.columns[j];
    std::size_t nb = std::max(bins[j], observed[j]);
    if (!cb.passthrough && cb.width > 0) {
      bool integral = true;
      for (std::size_t i = 0; i < original.rows(); ++i)
        if (!original.missing(i, j) && original.value(i, j) != std::floor(original.value(i, j))) integral = false;
      const double resolution = integral ? 1.0 : 0.0;
      const double d = delta.value_or(std::floor((cb.width - 1.0) / 2.0));
      for (std::size_t i = 0; i < original.rows(); ++i) {
        if (original.missing(i, j)) continue;
        double v = original.value(i, j);
        std::size_t b = static_cast<std::size_t>(discrete.value(i, j));
        double lower_edge = cb.lo + static_cast<double>(b - 1) * cb.width;
        if (b > 1 && v - (lower_edge - resolution) <= d) out.set(i, base + b - 2, 1.0);
        if (b < cb.bins && (lower_edge + cb.width) - v <= d) out.set(i, base + b, 1.0);
      }
    }
    base += nb;
  }
  return out;
}

/// Binary mode for concept mining: 0 cells become missing, 1 cells stay.
inline Matrix to_binary_mode(const Matrix& binary) {
  Matrix out = binary;
  for (std::size_t j = 0; j < out.cols(); ++j)
    for (std::size_t i = 0; i < out.rows(); ++i) {
      if (out.missing(i, j)) continue;
      double v = out.value(i, j);
      if (v == 0.0)
        out.set_missing(i, j);
      else if (v != 1.0)
        throw DataError("binary mode expects 0/1 values, found " + std::to_string(v));
    }
  return out;
}

// ---------------------------------------------------------------------------
// Synthetic data
// ---------------------------------------------------------------------------

struct SyntheticConfig {
  std::size_t n = 10000;
  std::size_t m = 100;
  std::size_t num_biclusters = 30;
  std::size_t bic_rows = 200;
  std::size_t bic_cols = 16;
  /// Fraction of rows shared by consecutively planted biclusters.
  double overlap = 0.2;
  double missing_pct = 0.0;
  double noise_sigma = 0.05;
  std::uint64_t rng_seed = 0;
  /// When > 0, values are multiplied by this and rounded to integers.
  double integer_scale = 0.0;
};

struct PlantedGroundTruth {
  std::vector<Bicluster> biclusters;
  /// row_perm[original] = shuffled position; likewise for columns.
  std::vector<Index> row_perm;
  std::vector<Index> col_perm;
};

struct SyntheticData {
  Matrix matrix;
  PlantedGroundTruth truth;
};

/// Matrix on a [0, 1] scale with planted constant-column blocks.
///
/// Block k takes bic_rows consecutive rows starting overlap-adjusted after
/// block k-1, and bic_cols consecutive (wrapping) columns chosen so that no
/// two blocks claim the same cell. Each planted column gets its own uniform
/// base value; the rest is uniform background. Gaussian noise is added
/// everywhere, missing cells are placed outside the blocks, then rows and
/// columns are shuffled.
inline SyntheticData generate_synthetic(const SyntheticConfig& cfg) {
  if (cfg.n == 0 || cfg.m == 0) throw ConfigError("synthetic matrix must be non-empty");
  if (!(cfg.overlap >= 0.0 && cfg.overlap < 1.0)) throw ConfigError("overlap must be in [0, 1)");
  if (!(cfg.missing_pct >= 0.0 && cfg.missing_pct <= 1.0)) throw ConfigError("missing_pct must be in [0, 1]");
  if (cfg.noise_sigma < 0.0) throw ConfigError("noise_sigma must be >= 0");

  std::vector<Bicluster> blocks;
  if (cfg.num_biclusters > 0) {
    if (cfg.bic_rows == 0 || cfg.bic_cols == 0 || cfg.bic_rows > cfg.n || cfg.bic_cols > cfg.m)
      throw ConfigError("planted bicluster shape does not fit the matrix");
    const std::size_t shared = static_cast<std::size_t>(std::llround(cfg.overlap * static_cast<double>(cfg.bic_rows)));
    const std::size_t step = cfg.bic_rows - shared;
    if (step == 0) throw ConfigError("overlap leaves no new rows per bicluster");
    if ((cfg.num_biclusters - 1) * step + cfg.bic_rows > cfg.n)
      throw ConfigError("planted biclusters need more rows than the matrix has");

    std::vector<std::uint8_t> claimed(cfg.n * cfg.m, 0);
    for (std::size_t k = 0; k < cfg.num_biclusters; ++k) {
      Bicluster b;
      for (std::size_t r = 0; r < cfg.bic_rows; ++r) b.rows.push_back(static_cast<Index>(k * step + r));
      bool placed = false;
      for (std::size_t shift = 0; shift < cfg.m && !placed; ++shift) {
        std::size_t first = (k * cfg.bic_cols + shift) % cfg.m;
        b.cols.clear();
        for (std::size_t c = 0; c < cfg.bic_cols; ++c) b.cols.push_back(static_cast<Index>((first + c) % cfg.m));
        placed = std::none_of(b.rows.begin(), b.rows.end(), [&](Index i) {
          return std::any_of(b.cols.begin(), b.cols.end(), [&](Index j) { return claimed[j * cfg.n + i] != 0; });
        });
      }
      if (!placed) throw ConfigError("cannot place planted bicluster " + std::to_string(k) + " without collisions");
      std::sort(b.cols.begin(), b.cols.end());
      for (Index j : b.cols)
        for (Index i : b.rows) claimed[j * cfg.n + i] = 1;
      blocks.push_back(std::move(b));
    }
  }

  std::mt19937_64 rng(cfg.rng_seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> noise(0.0, cfg.noise_sigma);

  std::vector<double> raw(cfg.n * cfg.m);
  for (double& v : raw) v = unit(rng);
  std::vector<std::uint8_t> planted(cfg.n * cfg.m, 0);
  for (const Bicluster& b : blocks)
    for (Index j : b.cols) {
      double base = unit(rng);
      for (Index i : b.rows) {
        raw[j * cfg.n + i] = base;
        planted[j * cfg.n + i] = 1;
      }
    }
  if (cfg.noise_sigma > 0)
    for (double& v : raw) v += noise(rng);

  std::vector<std::uint8_t> miss(cfg.n * cfg.m, 0);
  if (cfg.missing_pct > 0)
    for (std::size_t c = 0; c < miss.size(); ++c)
      if (!planted[c] && unit(rng) < cfg.missing_pct) miss[c] = 1;

  std::vector<Index> row_perm(cfg.n), col_perm(cfg.m);
  std::iota(row_perm.begin(), row_perm.end(), Index{0});
  std::iota(col_perm.begin(), col_perm.end(), Index{0});
  std::shuffle(row_perm.begin(), row_perm.end(), rng);
  std::shuffle(col_perm.begin(), col_perm.end(), rng);

  Matrix mat(cfg.n, cfg.m);
  for (std::size_t j = 0; j < cfg.m; ++j)
    for (std::size_t i = 0; i < cfg.n; ++i) {
      if (miss[j * cfg.n + i]) {
        mat.set_missing(row_perm[i], col_perm[j]);
        continue;
      }
      double v = raw[j * cfg.n + i];
      if (cfg.integer_scale > 0) v = std::round(v * cfg.integer_scale);
      mat.set(row_perm[i], col_perm[j], v);
    }
  if (cfg.integer_scale > 0)
    for (std::size_t j = 0; j < cfg.m; ++j) mat.set_kind(j, ColumnKind::discrete);

  PlantedGroundTruth truth;
  for (const Bicluster& b : blocks) {
    Bicluster s;
    for (Index i : b.rows) s.rows.push_back(row_perm[i]);
    for (Index j : b.cols) s.cols.push_back(col_perm[j]);
    std::sort(s.rows.begin(), s.rows.end());
    std::sort(s.cols.begin(), s.cols.end());
    truth.biclusters.push_back(std::move(s));
  }
  truth.row_perm = std::move(row_perm);
  truth.col_perm = std::move(col_perm);
  return {std::move(mat), std::move(truth)};
}

// ---------------------------------------------------------------------------
// Other transforms
// ---------------------------------------------------------------------------

/// Per column: log(v + shift), min-max scaled to [0, 1], kept to three
/// decimals and multiplied by 1000, giving integers in [0, 1000].
/// A constant column maps to 0.
inline Matrix preprocess_log_scale(const Matrix& mat, double shift = 0.0,
                                   std::vector<std::string>* warnings = nullptr) {
  Matrix out(mat.rows(), mat.cols());
  for (std::size_t j = 0; j < mat.cols(); ++j) {
    out.set_name(j, mat.name(j));
    out.set_kind(j, ColumnKind::discrete);
    std::vector<double> logs(mat.rows(), 0.0);
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (std::size_t i = 0; i < mat.rows(); ++i) {
      if (mat.missing(i, j)) continue;
      double v = mat.value(i, j) + shift;
      if (!(v > 0.0))
        throw DataError("log scaling needs positive values; column '" + mat.name(j) + "' row " + std::to_string(i) +
                        " has " + std::to_string(mat.value(i, j)));
      logs[i] = std::log(v);
      lo = std::min(lo, logs[i]);
      hi = std::max(hi, logs[i]);
    }
    const double span = hi - lo;
    if (span == 0.0 && warnings) warnings->push_back(mat.name(j) + ": zero-spread column scaled to 0");
    for (std::size_t i = 0; i < mat.rows(); ++i) {
      if (mat.missing(i, j)) {
        out.set_missing(i, j);
        continue;
      }
      double scaled = span > 0.0 ? (logs[i] - lo) / span : 0.0;
      out.set(i, j, std::round(scaled * 1000.0));
    }
  }
  return out;
}

/// Exact transpose of values and mask. Mining CVC biclusters of the result
/// gives the CVR biclusters of the input with rows and columns swapped.
inline Matrix transpose(const Matrix& mat) {
  Matrix out(mat.cols(), mat.rows());
  for (std::size_t i = 0; i < mat.rows(); ++i)
    for (std::size_t j = 0; j < mat.cols(); ++j) {
      if (mat.missing(i, j))
        out.set_missing(j, i);
      else
        out.set(j, i, mat.value(i, j));
    }
  return out;
}

}  // namespace rinclose
