#include "seqgp/seqspace.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <charconv>
#include <limits>
#include <numeric>

#include "seqgp/errors.hpp"

namespace seqgp {

namespace {

constexpr int kMaxLength = 63;

bool mul_overflows(std::uint64_t a, std::uint64_t b, std::uint64_t& out) {
  return __builtin_mul_overflow(a, b, &out);
}

bool upow(std::uint64_t base, int exp, std::uint64_t& out) {
  out = 1;
  for (int i = 0; i < exp; ++i) {
    if (mul_overflows(out, base, out)) return false;
  }
  return true;
}

std::int64_t checked_mul(std::int64_t a, std::int64_t b) {
  std::int64_t r;
  if (__builtin_mul_overflow(a, b, &r)) {
    throw OverflowError("exact integer overflow; use a smaller alphabet or sequence length");
  }
  return r;
}

std::int64_t checked_add(std::int64_t a, std::int64_t b) {
  std::int64_t r;
  if (__builtin_add_overflow(a, b, &r)) {
    throw OverflowError("exact integer overflow; use a smaller alphabet or sequence length");
  }
  return r;
}

}  // namespace

std::uint64_t Subsequence::mask() const {
  std::uint64_t m = 0;
  for (int p : positions) m |= std::uint64_t{1} << p;
  return m;
}

int Subsequence::char_at(int p) const {
  auto it = std::lower_bound(positions.begin(), positions.end(), p);
  if (it == positions.end() || *it != p) return -1;
  return chars[static_cast<std::size_t>(it - positions.begin())];
}

SequenceSpace::SequenceSpace(std::string alphabet, int length, std::uint64_t dense_cap)
    : alphabet_(std::move(alphabet)), length_(length), dense_cap_(dense_cap) {
  if (alphabet_.size() < 2) throw DomainError("alphabet needs at least 2 symbols");
  if (length_ < 1) throw DomainError("sequence length must be >= 1");
  if (length_ > kMaxLength) throw SizeGuardError("sequence length exceeds 63 positions");
  std::string sorted = alphabet_;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    throw DomainError("alphabet symbols must be distinct");
  }
  for (char c : alphabet_) {
    if (c == ':' || c == ';' || c == '-' || c == ',' || c == '(' || c == ')' ||
        std::isspace(static_cast<unsigned char>(c))) {
      throw DomainError(std::string("alphabet symbol '") + c + "' is reserved");
    }
  }
}

std::uint64_t SequenceSpace::sequence_count() const {
  std::uint64_t n;
  if (!upow(static_cast<std::uint64_t>(alpha()), length_, n)) {
    throw SizeGuardError("sequence count alpha^l=" + std::to_string(alpha()) + "^" +
                         std::to_string(length_) + " does not fit in 64 bits");
  }
  return n;
}

std::uint64_t SequenceSpace::subsequence_count() const {
  std::uint64_t n;
  if (!upow(static_cast<std::uint64_t>(alpha() + 1), length_, n)) {
    throw SizeGuardError("subsequence count (alpha+1)^l=" + std::to_string(alpha() + 1) + "^" +
                         std::to_string(length_) + " does not fit in 64 bits");
  }
  return n;
}

void SequenceSpace::require_dense() const {
  std::uint64_t n;
  if (!upow(static_cast<std::uint64_t>(alpha()), length_, n) || n > dense_cap_) {
    throw SizeGuardError("dense size guard: alpha^l (" + std::to_string(alpha()) + "^" +
                         std::to_string(length_) + ") exceeds dense_cap=" +
                         std::to_string(dense_cap_));
  }
}

void SequenceSpace::require_dense_weights() const {
  std::uint64_t n;
  if (!upow(static_cast<std::uint64_t>(alpha() + 1), length_, n) || n > dense_cap_) {
    throw SizeGuardError("dense size guard: (alpha+1)^l (" + std::to_string(alpha() + 1) + "^" +
                         std::to_string(length_) + ") exceeds dense_cap=" +
                         std::to_string(dense_cap_));
  }
}

int SequenceSpace::symbol_index(char c) const {
  auto pos = alphabet_.find(c);
  return pos == std::string::npos ? -1 : static_cast<int>(pos);
}

void SequenceSpace::validate(const Sequence& x) const {
  if (static_cast<int>(x.size()) != length_) {
    throw DimensionError("sequence has length " + std::to_string(x.size()) + ", expected " +
                         std::to_string(length_));
  }
  for (int c : x.chars) {
    if (c < 0 || c >= alpha()) throw DomainError("character index out of range");
  }
}

void SequenceSpace::validate(const Subsequence& sub) const {
  if (sub.positions.size() != sub.chars.size()) {
    throw DimensionError("subsequence positions and characters differ in length");
  }
  for (std::size_t i = 0; i < sub.positions.size(); ++i) {
    int p = sub.positions[i];
    if (p < 0 || p >= length_) throw IndexError("subsequence position out of range");
    if (i > 0 && sub.positions[i - 1] >= p) {
      throw IndexError("subsequence positions must be strictly increasing");
    }
    if (sub.chars[i] < 0 || sub.chars[i] >= alpha()) {
      throw DomainError("character index out of range");
    }
  }
}

Sequence SequenceSpace::parse_sequence(std::string_view text) const {
  if (static_cast<int>(text.size()) != length_) {
    throw DimensionError("sequence '" + std::string(text) + "' has length " +
                         std::to_string(text.size()) + ", expected " + std::to_string(length_));
  }
  Sequence x;
  x.chars.reserve(text.size());
  for (char c : text) {
    int idx = symbol_index(c);
    if (idx < 0) {
      throw DomainError(std::string("unknown character '") + c + "' in sequence '" +
                        std::string(text) + "'");
    }
    x.chars.push_back(idx);
  }
  return x;
}

std::string SequenceSpace::format(const Sequence& x) const {
  std::string out;
  out.reserve(x.size());
  for (int c : x.chars) out.push_back(alphabet_[static_cast<std::size_t>(c)]);
  return out;
}

Subsequence SequenceSpace::parse_subsequence(std::string_view text) const {
  if (text == "-") return Subsequence::empty();
  if (text.empty()) throw IndexError("empty subsequence text; use '-' for the empty subsequence");
  std::vector<std::pair<int, int>> pairs;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find(';', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view item = text.substr(start, end - start);
    auto colon = item.find(':');
    if (colon == std::string_view::npos || colon == 0 || colon + 2 != item.size()) {
      throw IndexError("malformed subsequence entry '" + std::string(item) + "'");
    }
    int pos = 0;
    auto [ptr, ec] = std::from_chars(item.data(), item.data() + colon, pos);
    if (ec != std::errc() || ptr != item.data() + colon) {
      throw IndexError("malformed position in '" + std::string(item) + "'");
    }
    if (pos < 1 || pos > length_) {
      throw IndexError("position " + std::to_string(pos) + " out of range 1.." +
                       std::to_string(length_));
    }
    int c = symbol_index(item[colon + 1]);
    if (c < 0) {
      throw IndexError(std::string("unknown character '") + item[colon + 1] + "' in '" +
                       std::string(item) + "'");
    }
    pairs.emplace_back(pos - 1, c);
    start = end + 1;
  }
  std::sort(pairs.begin(), pairs.end());
  Subsequence sub;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    if (i > 0 && pairs[i].first == pairs[i - 1].first) {
      throw IndexError("position " + std::to_string(pairs[i].first + 1) + " repeated in '" +
                       std::string(text) + "'");
    }
    sub.positions.push_back(pairs[i].first);
    sub.chars.push_back(pairs[i].second);
  }
  return sub;
}

std::string SequenceSpace::format(const Subsequence& sub) const {
  if (sub.positions.empty()) return "-";
  std::string out;
  for (std::size_t i = 0; i < sub.positions.size(); ++i) {
    if (i > 0) out.push_back(';');
    out += std::to_string(sub.positions[i] + 1);
    out.push_back(':');
    out.push_back(alphabet_[static_cast<std::size_t>(sub.chars[i])]);
  }
  return out;
}

std::uint64_t SequenceSpace::index_of(const Sequence& x) const {
  std::uint64_t idx = 0;
  const auto a = static_cast<std::uint64_t>(alpha());
  for (int c : x.chars) idx = idx * a + static_cast<std::uint64_t>(c);
  return idx;
}

Sequence SequenceSpace::sequence_at(std::uint64_t index) const {
  Sequence x;
  x.chars.assign(static_cast<std::size_t>(length_), 0);
  const auto a = static_cast<std::uint64_t>(alpha());
  for (int p = length_ - 1; p >= 0; --p) {
    x.chars[static_cast<std::size_t>(p)] = static_cast<int>(index % a);
    index /= a;
  }
  return x;
}

// Masks are scanned from the highest bit down. With c bits already set above
// bit b, the masks sharing that prefix but with bit b clear account for
// alpha^c * (alpha+1)^b subsequences.
std::uint64_t SequenceSpace::index_of(const Subsequence& sub) const {
  const std::uint64_t mask = sub.mask();
  const auto a = static_cast<std::uint64_t>(alpha());
  std::uint64_t offset = 0;
  std::uint64_t prefix_weight = 1;  // alpha^c
  for (int b = length_ - 1; b >= 0; --b) {
    if (mask >> b & 1U) {
      std::uint64_t block;
      if (!upow(a + 1, b, block)) throw SizeGuardError("subsequence index overflow");
      offset += prefix_weight * block;
      prefix_weight *= a;
    }
  }
  std::uint64_t code = 0;
  for (int c : sub.chars) code = code * a + static_cast<std::uint64_t>(c);
  return offset + code;
}

Subsequence SequenceSpace::subsequence_at(std::uint64_t index) const {
  const auto a = static_cast<std::uint64_t>(alpha());
  std::uint64_t prefix_weight = 1;
  std::uint64_t mask = 0;
  for (int b = length_ - 1; b >= 0; --b) {
    std::uint64_t block;
    if (!upow(a + 1, b, block)) throw SizeGuardError("subsequence index overflow");
    std::uint64_t zero_block = prefix_weight * block;
    if (index >= zero_block) {
      index -= zero_block;
      mask |= std::uint64_t{1} << b;
      prefix_weight *= a;
    }
  }
  Subsequence sub;
  for (int p = 0; p < length_; ++p) {
    if (mask >> p & 1U) sub.positions.push_back(p);
  }
  sub.chars.assign(sub.positions.size(), 0);
  for (std::size_t i = sub.positions.size(); i-- > 0;) {
    sub.chars[i] = static_cast<int>(index % a);
    index /= a;
  }
  return sub;
}

std::vector<Sequence> SequenceSpace::enumerate() const {
  require_dense();
  const std::uint64_t n = sequence_count();
  std::vector<Sequence> out;
  out.reserve(n);
  for (std::uint64_t i = 0; i < n; ++i) out.push_back(sequence_at(i));
  return out;
}

std::vector<Subsequence> SequenceSpace::subsequences_on(std::uint64_t mask) const {
  Subsequence proto;
  for (int p = 0; p < length_; ++p) {
    if (mask >> p & 1U) proto.positions.push_back(p);
  }
  const std::size_t k = proto.positions.size();
  std::uint64_t count;
  if (!upow(static_cast<std::uint64_t>(alpha()), static_cast<int>(k), count)) {
    throw SizeGuardError("too many subsequences on position set");
  }
  std::vector<Subsequence> out;
  out.reserve(count);
  proto.chars.assign(k, 0);
  for (std::uint64_t code = 0; code < count; ++code) {
    std::uint64_t rest = code;
    for (std::size_t i = k; i-- > 0;) {
      proto.chars[i] = static_cast<int>(rest % static_cast<std::uint64_t>(alpha()));
      rest /= static_cast<std::uint64_t>(alpha());
    }
    out.push_back(proto);
  }
  return out;
}

std::vector<Subsequence> SequenceSpace::enumerate_subseq() const {
  require_dense_weights();
  std::vector<Subsequence> out;
  out.reserve(subsequence_count());
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << length_); ++mask) {
    auto block = subsequences_on(mask);
    out.insert(out.end(), std::make_move_iterator(block.begin()),
               std::make_move_iterator(block.end()));
  }
  return out;
}

int hamming(const Sequence& x, const Sequence& y) {
  if (x.size() != y.size()) {
    throw DimensionError("hamming: sequences of length " + std::to_string(x.size()) + " and " +
                         std::to_string(y.size()));
  }
  int d = 0;
  for (std::size_t p = 0; p < x.size(); ++p) d += x.chars[p] != y.chars[p];
  return d;
}

bool subseq_indicator(const Sequence& x, const Subsequence& sub) {
  for (std::size_t i = 0; i < sub.positions.size(); ++i) {
    auto p = static_cast<std::size_t>(sub.positions[i]);
    if (p >= x.size()) throw DimensionError("subsequence position beyond sequence length");
    if (x.chars[p] != sub.chars[i]) return false;
  }
  return true;
}

Eigen::MatrixXd phi_rows(const SequenceSpace& space, const std::vector<Sequence>& xs) {
  const auto subs = space.enumerate_subseq();
  Eigen::MatrixXd phi = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(xs.size()),
                                              static_cast<Eigen::Index>(subs.size()));
  for (std::size_t r = 0; r < xs.size(); ++r) {
    space.validate(xs[r]);
    for (std::size_t c = 0; c < subs.size(); ++c) {
      if (subseq_indicator(xs[r], subs[c])) {
        phi(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = 1.0;
      }
    }
  }
  return phi;
}

Eigen::MatrixXd phi_dense(const SequenceSpace& space) {
  space.require_dense();
  return phi_rows(space, space.enumerate());
}

std::int64_t binomial(int n, int k) {
  if (n < 0 || k < 0) throw DomainError("binomial: negative argument");
  if (k > n) return 0;
  k = std::min(k, n - k);
  __int128 r = 1;
  for (int i = 1; i <= k; ++i) {
    r = r * (n - k + i) / i;  // exact: r * (n-k+i) is divisible by i here
    if (r > std::numeric_limits<std::int64_t>::max()) {
      throw OverflowError("binomial(" + std::to_string(n) + "," + std::to_string(k) +
                          ") overflows 64 bits; use a smaller instance");
    }
  }
  return static_cast<std::int64_t>(r);
}

std::int64_t checked_pow(std::int64_t base, int exp) {
  if (exp < 0) throw DomainError("checked_pow: negative exponent");
  std::int64_t r = 1;
  for (int i = 0; i < exp; ++i) r = checked_mul(r, base);
  return r;
}

std::int64_t krawtchouk(int k, int d, int length, int alpha) {
  if (k < 0 || k > length || d < 0 || d > length) {
    throw DomainError("krawtchouk: need 0 <= k, d <= l");
  }
  std::int64_t total = 0;
  for (int i = 0; i <= k; ++i) {
    std::int64_t term = checked_mul(checked_pow(alpha - 1, k - i),
                                    checked_mul(binomial(d, i), binomial(length - d, k - i)));
    total = checked_add(total, (i % 2 == 0) ? term : -term);
  }
  return total;
}

}  // namespace seqgp
