#include "qmclab/sequences.hpp"

#include <cstdlib>
#include <fstream>
#include <istream>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace qmclab {

mpz_class mpz_from_u128(u128 v) {
  mpz_class hi(static_cast<unsigned long>(v >> 64));
  mpz_class lo(static_cast<unsigned long>(v & ~std::uint64_t{0}));
  return (hi << 64) + lo;
}

u128 u128_from_mpz(const mpz_class& v) {
  if (sgn(v) < 0 || mpz_sizeinbase(v.get_mpz_t(), 2) > 128)
    throw std::overflow_error("u128_from_mpz: value out of range");
  mpz_class hi = v >> 64;
  mpz_class lo = v - (hi << 64);
  return (static_cast<u128>(hi.get_ui()) << 64) | lo.get_ui();
}

std::string u128_to_string(u128 v) {
  if (v == 0) return "0";
  std::string s;
  while (v) {
    s.push_back(static_cast<char>('0' + static_cast<unsigned>(v % 10)));
    v /= 10;
  }
  return std::string(s.rbegin(), s.rend());
}

mpq_class to_mpq(const DyadicRational& x) {
  mpq_class q(mpz_from_u128(x.num));
  q /= mpq_class(mpz_class(1) << x.e);
  return q;
}

double to_double(const DyadicRational& x) { return to_mpq(x).get_d(); }

mpq_class to_mpq(const RationalCoordinate& x) {
  mpq_class q(static_cast<unsigned long>(x.num));
  q /= mpq_class(static_cast<unsigned long>(x.den));
  return q;
}

double to_double(const RationalCoordinate& x) {
  return static_cast<double>(x.num) / static_cast<double>(x.den);
}

std::vector<mpq_class> to_mpq(const std::vector<DyadicRational>& xs) {
  std::vector<mpq_class> out;
  out.reserve(xs.size());
  for (const auto& x : xs) out.push_back(to_mpq(x));
  return out;
}

std::vector<mpq_class> to_mpq(const std::vector<RationalCoordinate>& xs) {
  std::vector<mpq_class> out;
  out.reserve(xs.size());
  for (const auto& x : xs) out.push_back(to_mpq(x));
  return out;
}

std::vector<double> to_double(const std::vector<mpq_class>& xs) {
  std::vector<double> out;
  out.reserve(xs.size());
  for (const auto& x : xs) out.push_back(x.get_d());
  return out;
}

RationalCoordinate radical_inverse(std::uint64_t i, unsigned base) {
  if (base < 2) throw std::invalid_argument("radical_inverse: base must be >= 2");
  RationalCoordinate r{0, 1};
  while (i) {
    if (r.den > ~std::uint64_t{0} / base)
      throw std::overflow_error("radical_inverse: denominator overflows 64 bits");
    r.num = r.num * base + i % base;
    r.den *= base;
    i /= base;
  }
  return r;
}

std::vector<RationalCoordinate> halton_point(std::uint64_t i,
                                             const std::vector<unsigned>& bases) {
  if (bases.empty()) throw std::invalid_argument("halton_point: no bases");
  for (std::size_t a = 0; a < bases.size(); ++a) {
    if (bases[a] < 2) throw std::invalid_argument("halton_point: base must be >= 2");
    for (std::size_t b = a + 1; b < bases.size(); ++b)
      if (std::gcd(bases[a], bases[b]) != 1)
        throw std::invalid_argument("halton_point: bases must be pairwise coprime");
  }
  std::vector<RationalCoordinate> x;
  x.reserve(bases.size());
  for (unsigned b : bases) x.push_back(radical_inverse(i, b));
  return x;
}

std::vector<unsigned> first_primes(unsigned d) {
  std::vector<unsigned> ps;
  for (unsigned c = 2; ps.size() < d; ++c) {
    bool prime = true;
    for (unsigned p : ps) {
      if (p * p > c) break;
      if (c % p == 0) { prime = false; break; }
    }
    if (prime) ps.push_back(c);
  }
  return ps;
}

std::vector<DirectionNumberRecord> load_direction_numbers(std::istream& in) {
  std::vector<DirectionNumberRecord> out;
  std::string line;
  std::size_t lineno = 0;
  bool header_skipped = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (!header_skipped) { header_skipped = true; continue; }
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream ls(line);
    DirectionNumberRecord rec;
    if (!(ls >> rec.dim >> rec.s >> rec.a))
      throw std::runtime_error("direction numbers: line " + std::to_string(lineno) +
                               ": malformed record header");
    if (rec.dim < 2 || rec.s == 0)
      throw std::runtime_error("direction numbers: line " + std::to_string(lineno) +
                               ": dimension must be >= 2 and s >= 1");
    rec.m.resize(rec.s);
    for (unsigned i = 0; i < rec.s; ++i) {
      if (!(ls >> rec.m[i]))
        throw std::runtime_error("direction numbers: line " + std::to_string(lineno) +
                                 ": expected " + std::to_string(rec.s) + " initial values");
      if (rec.m[i] % 2 == 0)
        throw std::runtime_error("direction numbers: line " + std::to_string(lineno) +
                                 ": m_" + std::to_string(i + 1) + " must be odd");
      if (i + 1 < 64 && rec.m[i] >= (std::uint64_t{1} << (i + 1)))
        throw std::runtime_error("direction numbers: line " + std::to_string(lineno) +
                                 ": m_" + std::to_string(i + 1) + " must be below 2^" +
                                 std::to_string(i + 1));
    }
    std::string extra;
    if (ls >> extra)
      throw std::runtime_error("direction numbers: line " + std::to_string(lineno) +
                               ": trailing tokens");
    out.push_back(std::move(rec));
  }
  if (out.empty()) throw std::runtime_error("direction numbers: no records");
  return out;
}

std::vector<DirectionNumberRecord> load_direction_numbers_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("direction numbers: cannot open " + path);
  return load_direction_numbers(in);
}

std::string default_direction_file() {
  if (const char* env = std::getenv("QMCLAB_DIRECTION_FILE")) return env;
  return "data/joe_kuo_6_d50.txt";
}

GeneratorSet sobol_generator_set(const std::vector<DirectionNumberRecord>& table,
                                 unsigned d, unsigned m) {
  if (d == 0) throw std::invalid_argument("sobol_generator_set: d must be >= 1");
  if (m == 0 || m > 128)
    throw std::invalid_argument("sobol_generator_set: precision must be in 1..128");
  GeneratorSet g;
  g.d = d;
  g.m = m;
  g.cols.resize(d);
  // Dimension 1 is the identity matrix: column c has its single one in row c.
  g.cols[0].resize(m);
  for (unsigned c = 0; c < m; ++c) g.cols[0][c] = shl128(1, m - 1 - c);
  for (unsigned j = 2; j <= d; ++j) {
    const DirectionNumberRecord* rec = nullptr;
    for (const auto& r : table)
      if (r.dim == j) { rec = &r; break; }
    if (!rec)
      throw std::runtime_error("sobol_generator_set: no record for dimension " +
                               std::to_string(j));
    const unsigned s = rec->s;
    std::vector<u128> mv(m);
    for (unsigned c = 0; c < m; ++c) {
      if (c < s) {
        mv[c] = rec->m[c];
        continue;
      }
      u128 v = (mv[c - s] << s) ^ mv[c - s];
      for (unsigned k = 1; k < s; ++k)
        if ((rec->a >> (s - 1 - k)) & 1u) v ^= mv[c - k] << k;
      mv[c] = v;
    }
    g.cols[j - 1].resize(m);
    for (unsigned c = 0; c < m; ++c) g.cols[j - 1][c] = shl128(mv[c], m - 1 - c);
  }
  g.rows.assign(d, std::vector<RowMask>(m));
  for (unsigned j = 0; j < d; ++j)
    for (unsigned r = 0; r < m; ++r)
      for (unsigned c = 0; c < m; ++c)
        if ((g.cols[j][c] >> (m - 1 - r)) & 1) g.rows[j][r].set(c);
  return g;
}

std::vector<DyadicRational> sobol_point(u128 i, const GeneratorSet& g) {
  if (g.m < 128 && (i >> g.m) != 0)
    throw std::invalid_argument("sobol_point: index needs more bits than the precision");
  std::vector<DyadicRational> x(g.d);
  for (unsigned j = 0; j < g.d; ++j) {
    u128 num = 0;
    u128 bits = i;
    for (unsigned b = 0; bits != 0; ++b, bits >>= 1)
      if (bits & 1) num ^= g.cols[j][b];
    x[j] = DyadicRational(num, g.m);
  }
  return x;
}

std::vector<std::vector<mpq_class>> sobol_points_mpq(std::uint64_t n, const GeneratorSet& g) {
  std::vector<std::vector<mpq_class>> pts;
  pts.reserve(n);
  for (std::uint64_t i = 0; i < n; ++i) pts.push_back(to_mpq(sobol_point(i, g)));
  return pts;
}

std::vector<std::vector<unsigned>> compositions(unsigned total, unsigned d) {
  std::vector<std::vector<unsigned>> out;
  std::vector<unsigned> cur(d, 0);
  // Depth-first over parts; lexicographic by construction.
  auto rec = [&](auto&& self, unsigned pos, unsigned left) -> void {
    if (pos + 1 == d) {
      cur[pos] = left;
      out.push_back(cur);
      return;
    }
    for (unsigned v = 0; v <= left; ++v) {
      cur[pos] = v;
      self(self, pos + 1, left - v);
    }
  };
  if (d == 0) throw std::invalid_argument("compositions: d must be >= 1");
  rec(rec, 0, total);
  return out;
}

namespace {

// Exact cell index floor(x * b^k) for x in [0,1).
std::uint64_t cell_index(const mpq_class& x, unsigned b, unsigned k) {
  mpz_class scaled = x.get_num();
  for (unsigned i = 0; i < k; ++i) scaled *= b;
  mpz_class idx = scaled / x.get_den();  // truncation == floor for x >= 0
  return idx.get_ui();
}

std::uint64_t pow_u64(unsigned b, unsigned e) {
  std::uint64_t p = 1;
  for (unsigned i = 0; i < e; ++i) {
    if (p > ~std::uint64_t{0} / b) throw std::overflow_error("pow_u64 overflow");
    p *= b;
  }
  return p;
}

bool level_equidistributed(const std::vector<std::vector<mpq_class>>& points,
                           unsigned q, unsigned d, unsigned b,
                           std::uint64_t want) {
  for (const auto& k : compositions(q, d)) {
    std::vector<std::uint64_t> radix(d);
    std::uint64_t cells = 1;
    for (unsigned j = 0; j < d; ++j) {
      radix[j] = pow_u64(b, k[j]);
      cells *= radix[j];
    }
    std::vector<std::uint64_t> count(cells, 0);
    for (const auto& x : points) {
      std::uint64_t id = 0;
      for (unsigned j = 0; j < d; ++j) id = id * radix[j] + cell_index(x[j], b, k[j]);
      if (++count[id] > want) return false;
    }
  }
  return true;
}

}  // namespace

bool is_tmd_net(const std::vector<std::vector<mpq_class>>& points,
                unsigned t, unsigned m, unsigned d, unsigned b) {
  if (b < 2) throw std::invalid_argument("is_tmd_net: base must be >= 2");
  if (t > m) throw std::invalid_argument("is_tmd_net: t must be <= m");
  if (points.size() != pow_u64(b, m))
    throw std::invalid_argument("is_tmd_net: point count must be b^m");
  for (const auto& x : points) {
    if (x.size() != d) throw std::invalid_argument("is_tmd_net: wrong point dimension");
    for (const auto& c : x)
      if (c < 0 || c >= 1) throw std::invalid_argument("is_tmd_net: coordinate outside [0,1)");
  }
  for (unsigned q = 0; q + t <= m; ++q)
    if (!level_equidistributed(points, q, d, b, pow_u64(b, m - q)))
      return false;
  return true;
}

unsigned smallest_net_t(const std::vector<std::vector<mpq_class>>& points,
                        unsigned m, unsigned d, unsigned b) {
  // Equidistribution at level q implies it at all coarser levels, so the
  // smallest t is m minus the deepest fully equidistributed level.
  unsigned best = m;
  for (unsigned q = m; q + 1 != 0; --q) {
    if (level_equidistributed(points, q, d, b, pow_u64(b, m - q))) {
      best = m - q;
      break;
    }
  }
  return best;
}

}  // namespace qmclab
