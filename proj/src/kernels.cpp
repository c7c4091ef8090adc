#include "qruns/kernels.hpp"

#include <algorithm>
#include <array>
#include <limits>
#include <vector>

namespace qruns {

namespace {

constexpr std::int64_t kUnbounded = std::numeric_limits<std::int64_t>::max();

struct PartRange {
  std::int64_t lo = 1;
  std::int64_t hi = kUnbounded;
  std::int64_t at_least = 0;  // 0 when there is no max-part requirement
};

PartRange range_of(const PartConstraint& c) {
  return std::visit(
      [](const auto& v) -> PartRange {
        using V = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<V, Bounded>) {
          return {1, v.hi, 0};
        } else if constexpr (std::is_same_v<V, Positive>) {
          return {1, kUnbounded, 0};
        } else if constexpr (std::is_same_v<V, SomeAtLeast>) {
          return {1, kUnbounded, std::max<std::int64_t>(v.k, 1)};
        } else {
          return {0, v.hi, 0};
        }
      },
      c);
}

// (tag, parameter) pair identifying a constraint inside cache keys.
std::pair<int, std::int64_t> encode(const PartConstraint& c) {
  return std::visit(
      [](const auto& v) -> std::pair<int, std::int64_t> {
        using V = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<V, Bounded>) {
          return {0, v.hi};
        } else if constexpr (std::is_same_v<V, Positive>) {
          return {1, 0};
        } else if constexpr (std::is_same_v<V, SomeAtLeast>) {
          return {2, v.k};
        } else {
          return {3, v.hi};
        }
      },
      c);
}

bool first_run_is_success(ArrangementShape s) {
  return s == ArrangementShape::SF || s == ArrangementShape::SS;
}

bool last_run_is_success(ArrangementShape s) {
  return s == ArrangementShape::FS || s == ArrangementShape::SS;
}

// Whether `total` can be split into `parts` parts drawn from `range`.
bool splittable(std::int64_t total, std::int64_t parts, const PartRange& range) {
  if (parts < 0 || total < 0) return false;
  if (parts == 0) return total == 0 && range.at_least == 0;
  if (total < parts * range.lo) return false;
  if (range.hi != kUnbounded && total > parts * range.hi) return false;
  if (range.at_least > 0 && (range.hi != kUnbounded && range.hi < range.at_least))
    return false;
  if (range.at_least > 0 && total < range.at_least + (parts - 1) * range.lo)
    return false;
  return true;
}

// Enumerates every composition of `total` into `parts` parts from `range`
// and calls visit(parts_vector).
template <typename Visit>
void for_each_composition(std::int64_t total, std::int64_t parts,
                          const PartRange& range, Visit&& visit) {
  std::vector<std::int64_t> current(static_cast<std::size_t>(parts));
  auto rec = [&](auto&& self, std::size_t index, std::int64_t left) -> void {
    if (index == current.size()) {
      if (left != 0) return;
      if (range.at_least > 0 &&
          *std::max_element(current.begin(), current.end()) < range.at_least) {
        return;
      }
      visit(current);
      return;
    }
    const std::int64_t slots_after =
        static_cast<std::int64_t>(current.size() - index - 1);
    const std::int64_t hi =
        range.hi == kUnbounded ? left : std::min(range.hi, left);
    for (std::int64_t v = range.lo; v <= hi; ++v) {
      if (left - v < slots_after * range.lo) break;
      current[index] = v;
      self(self, index + 1, left - v);
    }
  };
  if (parts == 0) {
    if (total == 0 && range.at_least == 0) visit(current);
    return;
  }
  rec(rec, 0, total);
}

template <Scalar T>
T evaluate_polynomial(const std::vector<std::uint64_t>& coeffs, const T& q) {
  T acc = from_int<T>(0);
  for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) {
    acc = acc * q + from_int<T>(static_cast<std::int64_t>(*it));
  }
  return acc;
}

}  // namespace

std::int64_t KernelSpec::x_runs() const {
  switch (shape) {
    case ArrangementShape::FF:
      return y_runs - 1;
    case ArrangementShape::FS:
    case ArrangementShape::SF:
      return y_runs;
    case ArrangementShape::SS:
      return y_runs + 1;
  }
  return 0;
}

template <Scalar T>
T kernel_direct(const KernelSpec& spec, const T& q, std::int64_t max_total) {
  if (spec.x_total + spec.y_total > max_total) {
    throw EnumerationBudgetExceeded(
        "kernel_direct: x_total + y_total = " +
        std::to_string(spec.x_total + spec.y_total) + " exceeds budget " +
        std::to_string(max_total));
  }
  const std::int64_t nx = spec.x_runs();
  const std::int64_t ny = spec.y_runs;
  if (nx < 0 || ny < 0 || spec.x_total < 0 || spec.y_total < 0) {
    return from_int<T>(0);
  }
  const PartRange xr = range_of(spec.x_constraint);
  const PartRange yr = range_of(spec.y_constraint);
  const bool success_first = first_run_is_success(spec.shape);

  // Integer histogram of exponents, evaluated once at the end.
  std::vector<std::uint64_t> coeffs(
      static_cast<std::size_t>(spec.x_total * spec.y_total + 1), 0);

  std::vector<std::vector<std::int64_t>> y_comps;
  for_each_composition(spec.y_total, ny, yr,
                       [&](const std::vector<std::int64_t>& ys) {
                         y_comps.push_back(ys);
                       });
  if (y_comps.empty()) return from_int<T>(0);

  for_each_composition(
      spec.x_total, nx, xr, [&](const std::vector<std::int64_t>& xs) {
        for (const auto& ys : y_comps) {
          // Walk the arrangement left to right, tracking failures seen.
          std::int64_t failures_seen = 0;
          std::int64_t exponent = 0;
          std::size_t xi = 0;
          std::size_t yi = 0;
          bool success_turn = success_first;
          while (xi < xs.size() || yi < ys.size()) {
            if (success_turn) {
              exponent += failures_seen * xs[xi++];
            } else {
              failures_seen += ys[yi++];
            }
            success_turn = !success_turn;
          }
          coeffs[static_cast<std::size_t>(exponent)] += 1;
        }
      });
  return evaluate_polynomial(coeffs, q);
}

namespace {

template <Scalar T>
class PeelingEvaluator {
 public:
  PeelingEvaluator(const KernelSpec& spec, const T& q,
                   typename KernelValueCache<T>::Table& memo)
      : x_(range_of(spec.x_constraint)),
        y_(range_of(spec.y_constraint)),
        q_(q),
        memo_(memo) {
    q_powers_.push_back(from_int<T>(1));
  }

  T solve(std::int64_t m, std::int64_t r, std::int64_t nx, std::int64_t ny,
          bool last_success, bool need_x, bool need_y) {
    if (nx == 0 && ny == 0) {
      return from_int<T>((m == 0 && r == 0 && !need_x && !need_y) ? 1 : 0);
    }
    // Alternation: the last run's symbol has either as many runs as the
    // other symbol or exactly one more.
    if (last_success) {
      if (nx == 0 || (nx != ny && nx != ny + 1)) return from_int<T>(0);
    } else {
      if (ny == 0 || (ny != nx && ny != nx + 1)) return from_int<T>(0);
    }
    PartRange xr = x_;
    PartRange yr = y_;
    if (!need_x) xr.at_least = 0;
    if (!need_y) yr.at_least = 0;
    if (!splittable(m, nx, xr) || !splittable(r, ny, yr)) {
      return from_int<T>(0);
    }

    const std::uint64_t key = pack(m, r, nx, ny, last_success, need_x, need_y);
    if (auto it = memo_.find(key); it != memo_.end()) return it->second;

    T value = from_int<T>(0);
    if (last_success) {
      const std::int64_t hi = x_.hi == kUnbounded ? m : std::min(x_.hi, m);
      for (std::int64_t a = x_.lo; a <= hi; ++a) {
        // All r remaining failures precede this final success run.
        T sub = solve(m - a, r, nx - 1, ny, false,
                      need_x && a < x_.at_least, need_y);
        if (sub != 0) value += q_power(a * r) * sub;
      }
    } else {
      const std::int64_t hi = y_.hi == kUnbounded ? r : std::min(y_.hi, r);
      for (std::int64_t b = y_.lo; b <= hi; ++b) {
        value += solve(m, r - b, nx, ny - 1, true, need_x,
                       need_y && b < y_.at_least);
      }
    }
    memo_.emplace(key, value);
    return value;
  }

 private:
  static std::uint64_t pack(std::int64_t m, std::int64_t r, std::int64_t nx,
                            std::int64_t ny, bool last_success, bool need_x,
                            bool need_y) {
    constexpr std::int64_t kLimit = 1 << 14;
    if (m >= kLimit || r >= kLimit || nx >= kLimit || ny >= kLimit) {
      throw std::length_error("kernel_eval: instance too large for state key");
    }
    std::uint64_t key = static_cast<std::uint64_t>(m);
    key = (key << 14) | static_cast<std::uint64_t>(r);
    key = (key << 14) | static_cast<std::uint64_t>(nx);
    key = (key << 14) | static_cast<std::uint64_t>(ny);
    key = (key << 3) | (static_cast<std::uint64_t>(last_success) << 2) |
          (static_cast<std::uint64_t>(need_x) << 1) |
          static_cast<std::uint64_t>(need_y);
    return key;
  }

  const T& q_power(std::int64_t e) {
    while (static_cast<std::int64_t>(q_powers_.size()) <= e) {
      q_powers_.push_back(q_powers_.back() * q_);
    }
    return q_powers_[static_cast<std::size_t>(e)];
  }

  PartRange x_;
  PartRange y_;
  T q_;
  typename KernelValueCache<T>::Table& memo_;
  std::vector<T> q_powers_;
};

}  // namespace

template <Scalar T>
T kernel_eval(const KernelSpec& spec, const T& q, KernelValueCache<T>& cache) {
  const std::int64_t nx = spec.x_runs();
  const std::int64_t ny = spec.y_runs;
  if (nx < 0 || ny < 0 || spec.x_total < 0 || spec.y_total < 0) {
    return from_int<T>(0);
  }
  const auto [xt, xp] = encode(spec.x_constraint);
  const auto [yt, yp] = encode(spec.y_constraint);
  const bool need_x = range_of(spec.x_constraint).at_least > 0;
  const bool need_y = range_of(spec.y_constraint).at_least > 0;
  if (nx == 0 && ny == 0) {
    // Empty arrangement: only the empty sum, and only without a max-part
    // requirement.
    return from_int<T>(
        (spec.x_total == 0 && spec.y_total == 0 && !need_x && !need_y) ? 1 : 0);
  }
  const bool success_last = last_run_is_success(spec.shape);

  typename KernelValueCache<T>::TableKey key{
      static_cast<int>(spec.shape), xt, xp, yt, yp, q};
  std::lock_guard lock(cache.mutex_);
  auto& memo = cache.tables_[key];
  PeelingEvaluator<T> evaluator(spec, q, memo);
  return evaluator.solve(spec.x_total, spec.y_total, nx, ny, success_last,
                         need_x, need_y);
}

template <Scalar T>
T kernel_eval(const KernelSpec& spec, const T& q) {
  KernelValueCache<T> cache;
  return kernel_eval(spec, q, cache);
}

template <Scalar T>
std::size_t KernelValueCache<T>::size() const {
  std::lock_guard lock(mutex_);
  std::size_t n = 0;
  for (const auto& [key, table] : tables_) n += table.size();
  return n;
}

template <Scalar T>
void KernelValueCache<T>::clear() {
  std::lock_guard lock(mutex_);
  tables_.clear();
}

// ---------------------------------------------------------------------------
// Named families

namespace {

enum class Part { BoundedK1, PositiveX, AtLeastK1, BoundedK2, PositiveY, AtLeastK2 };

struct FamilyRow {
  KernelFamily family;
  const char* name;
  ArrangementShape shape;
  Part x;
  Part y;
};

using AS = ArrangementShape;
using KF = KernelFamily;

constexpr std::array<FamilyRow, kFamilyCount> kFamilies{{
    {KF::A, "A", AS::FF, Part::BoundedK1, Part::BoundedK2},
    {KF::B, "B", AS::SF, Part::BoundedK1, Part::BoundedK2},
    {KF::C, "C", AS::SS, Part::BoundedK1, Part::BoundedK2},
    {KF::D, "D", AS::FS, Part::BoundedK1, Part::BoundedK2},
    {KF::EBar, "Ebar", AS::FF, Part::BoundedK1, Part::PositiveY},
    {KF::E, "E", AS::FF, Part::BoundedK1, Part::AtLeastK2},
    {KF::FBar, "Fbar", AS::SF, Part::BoundedK1, Part::PositiveY},
    {KF::F, "F", AS::SF, Part::BoundedK1, Part::AtLeastK2},
    {KF::GBar, "Gbar", AS::SS, Part::PositiveX, Part::BoundedK2},
    {KF::G, "G", AS::SS, Part::AtLeastK1, Part::BoundedK2},
    {KF::HBar, "Hbar", AS::FS, Part::PositiveX, Part::BoundedK2},
    {KF::H, "H", AS::FS, Part::AtLeastK1, Part::BoundedK2},
    {KF::IBar, "Ibar", AS::SS, Part::PositiveX, Part::PositiveY},
    {KF::I, "I", AS::SS, Part::PositiveX, Part::AtLeastK2},
    {KF::JBar, "Jbar", AS::FS, Part::PositiveX, Part::PositiveY},
    {KF::J, "J", AS::FS, Part::PositiveX, Part::AtLeastK2},
    {KF::KBar, "Kbar", AS::FF, Part::PositiveX, Part::PositiveY},
    {KF::K, "K", AS::FF, Part::AtLeastK1, Part::PositiveY},
    {KF::LBar, "Lbar", AS::SF, Part::PositiveX, Part::PositiveY},
    {KF::L, "L", AS::SF, Part::AtLeastK1, Part::PositiveY},
    {KF::MBar, "Mbar", AS::FS, Part::BoundedK1, Part::PositiveY},
    {KF::M, "M", AS::FS, Part::BoundedK1, Part::AtLeastK2},
    {KF::NBar, "Nbar", AS::SS, Part::BoundedK1, Part::PositiveY},
    {KF::N, "N", AS::SS, Part::BoundedK1, Part::AtLeastK2},
    {KF::OBar, "Obar", AS::FF, Part::PositiveX, Part::BoundedK2},
    {KF::O, "O", AS::FF, Part::AtLeastK1, Part::BoundedK2},
    {KF::PBar, "Pbar", AS::SF, Part::PositiveX, Part::BoundedK2},
    {KF::P, "P", AS::SF, Part::AtLeastK1, Part::BoundedK2},
    {KF::QBar, "Qbar", AS::FS, Part::AtLeastK1, Part::PositiveY},
    {KF::Q, "Q", AS::FS, Part::AtLeastK1, Part::AtLeastK2},
    {KF::RBar, "Rbar", AS::FF, Part::PositiveX, Part::AtLeastK2},
    {KF::R, "R", AS::FF, Part::AtLeastK1, Part::AtLeastK2},
    {KF::SBar, "Sbar", AS::SS, Part::AtLeastK1, Part::PositiveY},
    {KF::S, "S", AS::SS, Part::AtLeastK1, Part::AtLeastK2},
    {KF::TBar, "Tbar", AS::SF, Part::PositiveX, Part::AtLeastK2},
    {KF::T, "T", AS::SF, Part::AtLeastK1, Part::AtLeastK2},
}};

const FamilyRow& row_of(KernelFamily f) {
  return kFamilies[static_cast<std::size_t>(f)];
}

PartConstraint make_part(Part p, std::int64_t k1, std::int64_t k2) {
  switch (p) {
    case Part::BoundedK1:
      return Bounded{k1 - 1};
    case Part::AtLeastK1:
      return SomeAtLeast{k1};
    case Part::BoundedK2:
      return Bounded{k2 - 1};
    case Part::AtLeastK2:
      return SomeAtLeast{k2};
    case Part::PositiveX:
    case Part::PositiveY:
      return Positive{};
  }
  return Positive{};
}

}  // namespace

std::optional<KernelFamily> parse_family(std::string_view name) {
  std::string normalized{name};
  // U+0304 COMBINING MACRON, as in "Ē" written with a combining mark.
  const std::string macron = "\xCC\x84";
  if (auto pos = normalized.find(macron); pos != std::string::npos) {
    normalized = normalized.substr(0, pos) + "bar";
  }
  static constexpr std::array<std::pair<std::string_view, char>, 3> precomposed{{
      {"\xC4\x92", 'E'},  // Ē
      {"\xC4\xAA", 'I'},  // Ī
      {"\xC5\x8C", 'O'},  // Ō
  }};
  for (const auto& [glyph, letter] : precomposed) {
    if (normalized == glyph) {
      normalized = std::string(1, letter) + "bar";
    }
  }
  if (normalized.size() > 4 && normalized.ends_with("_bar")) {
    normalized = normalized.substr(0, normalized.size() - 4) + "bar";
  }
  if (normalized.size() == 4 && normalized.ends_with("Bar")) {
    normalized = normalized.substr(0, 1) + "bar";
  }
  for (const auto& row : kFamilies) {
    if (normalized == row.name) return row.family;
  }
  return std::nullopt;
}

std::string family_name(KernelFamily family) { return row_of(family).name; }

std::optional<KernelSpec> family_spec(KernelFamily family, std::int64_t m,
                                      std::int64_t r, std::int64_t s,
                                      std::int64_t k1, std::int64_t k2) {
  const FamilyRow& row = row_of(family);
  const std::int64_t y_runs = row.shape == AS::SS ? s - 1 : s;
  if (y_runs < 0 || m < 0 || r < 0) return std::nullopt;
  KernelSpec spec;
  spec.shape = row.shape;
  spec.y_runs = y_runs;
  spec.x_total = m;
  spec.y_total = r;
  spec.x_constraint = make_part(row.x, k1, k2);
  spec.y_constraint = make_part(row.y, k1, k2);
  if (spec.x_runs() < 0) return std::nullopt;
  return spec;
}

template <Scalar T>
T named_kernel(KernelFamily family, std::int64_t m, std::int64_t r,
               std::int64_t s, std::int64_t k1, std::int64_t k2, const T& q,
               KernelValueCache<T>& cache) {
  const auto spec = family_spec(family, m, r, s, k1, k2);
  if (!spec) return from_int<T>(0);
  return kernel_eval(*spec, q, cache);
}

template <Scalar T>
T named_kernel(std::string_view family, std::int64_t m, std::int64_t r,
               std::int64_t s, std::int64_t k1, std::int64_t k2, const T& q,
               KernelValueCache<T>& cache) {
  const auto parsed = parse_family(family);
  if (!parsed) {
    throw std::invalid_argument("unknown kernel family '" +
                                std::string(family) + "'");
  }
  return named_kernel(*parsed, m, r, s, k1, k2, q, cache);
}

// ---------------------------------------------------------------------------
// Cell kernels

namespace {

// Memo over (cells, balls, full cells) for one (k, q).
template <Scalar T>
class CellKernel {
 public:
  CellKernel(std::int64_t k, const T& q) : k_(k), q_(q) {}

  // U(r, s, t): peel the last cell; it is preceded by r-1 failures.
  T u(std::int64_t r, std::int64_t s, std::int64_t t) {
    if (s < 0 || t < 0 || t > r || r < 1) {
      return from_int<T>((r == 0 && s == 0 && t == 0) ? 1 : 0);
    }
    if (s > r * k_ || s < t * k_) return from_int<T>(0);
    if (r == 1) {
      const bool full = (s == k_ && t == 1);
      const bool partial = (s >= 0 && s < k_ && t == 0);
      return from_int<T>((full || partial) ? 1 : 0);
    }
    const std::uint64_t key = pack(r, s, t);
    if (auto it = memo_.find(key); it != memo_.end()) return it->second;
    T value = from_int<T>(0);
    for (std::int64_t a = 0; a <= k_ - 1; ++a) {
      value += power(a * (r - 1)) * u(r - 1, s - a, t);
    }
    value += power(k_ * (r - 1)) * u(r - 1, s - k_, t - 1);
    memo_.emplace(key, value);
    return value;
  }

  T v(std::int64_t r, std::int64_t s) {
    if (r < 1) return from_int<T>((r == 0 && s == 0) ? 1 : 0);
    if (s < 0 || s > r * k_) return from_int<T>(0);
    if (r == 1) return from_int<T>(1);
    const std::uint64_t key = pack(r, s, -1);
    if (auto it = memo_.find(key); it != memo_.end()) return it->second;
    T value = from_int<T>(0);
    for (std::int64_t a = 0; a <= k_; ++a) {
      value += power(a * (r - 1)) * v(r - 1, s - a);
    }
    memo_.emplace(key, value);
    return value;
  }

 private:
  static std::uint64_t pack(std::int64_t r, std::int64_t s, std::int64_t t) {
    return (static_cast<std::uint64_t>(r) << 42) |
           (static_cast<std::uint64_t>(s) << 21) |
           static_cast<std::uint64_t>(t + 1);
  }

  const T& power(std::int64_t e) {
    if (powers_.empty()) powers_.push_back(from_int<T>(1));
    while (static_cast<std::int64_t>(powers_.size()) <= e) {
      powers_.push_back(powers_.back() * q_);
    }
    return powers_[static_cast<std::size_t>(e)];
  }

  std::int64_t k_;
  T q_;
  std::unordered_map<std::uint64_t, T> memo_;
  std::vector<T> powers_;
};

}  // namespace

template <Scalar T>
T longest_cell_kernel_U(std::int64_t r, std::int64_t s, std::int64_t t,
                        std::int64_t k, const T& q) {
  if (k < 0) return from_int<T>(0);
  CellKernel<T> kernel(k, q);
  return kernel.u(r, s, t);
}

template <Scalar T>
T longest_cell_kernel_V(std::int64_t r, std::int64_t s, std::int64_t k,
                        const T& q) {
  if (k < 0) return from_int<T>(0);
  CellKernel<T> kernel(k, q);
  return kernel.v(r, s);
}

#define QRUNS_INSTANTIATE_KERNELS(T)                                          \
  template T kernel_direct<T>(const KernelSpec&, const T&, std::int64_t);    \
  template T kernel_eval<T>(const KernelSpec&, const T&,                     \
                            KernelValueCache<T>&);                           \
  template T kernel_eval<T>(const KernelSpec&, const T&);                    \
  template class KernelValueCache<T>;                                        \
  template T named_kernel<T>(KernelFamily, std::int64_t, std::int64_t,       \
                             std::int64_t, std::int64_t, std::int64_t,       \
                             const T&, KernelValueCache<T>&);                \
  template T named_kernel<T>(std::string_view, std::int64_t, std::int64_t,   \
                             std::int64_t, std::int64_t, std::int64_t,       \
                             const T&, KernelValueCache<T>&);                \
  template T longest_cell_kernel_U<T>(std::int64_t, std::int64_t,            \
                                      std::int64_t, std::int64_t, const T&); \
  template T longest_cell_kernel_V<T>(std::int64_t, std::int64_t,            \
                                      std::int64_t, const T&);

QRUNS_INSTANTIATE_KERNELS(double)
QRUNS_INSTANTIATE_KERNELS(Rational)

#undef QRUNS_INSTANTIATE_KERNELS

}  // namespace qruns
