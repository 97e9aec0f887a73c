#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace seqgp {

/// A full-length sequence, stored as character indices into the alphabet.
struct Sequence {
  std::vector<int> chars;

  std::size_t size() const { return chars.size(); }
  int operator[](std::size_t p) const { return chars[p]; }
  friend bool operator==(const Sequence&, const Sequence&) = default;
};

/// A subsequence (S, s): a strictly increasing set of 0-based positions and
/// the characters found there. The empty subsequence matches every sequence.
struct Subsequence {
  std::vector<int> positions;
  std::vector<int> chars;

  static Subsequence empty() { return {}; }
  std::size_t order() const { return positions.size(); }
  /// Bit p is set iff position p belongs to S.
  std::uint64_t mask() const;
  /// Character at position p, or -1 when p is not in S.
  int char_at(int p) const;
  friend bool operator==(const Subsequence&, const Subsequence&) = default;
};

/// The space A^l of sequences of a fixed length over a fixed alphabet.
///
/// Sequences are indexed as base-alpha integers with position 1 most
/// significant. Subsequences are ordered by position bitmask (bit p for
/// position p+1) and then by their characters in base-alpha order, so the
/// first subsequence is always the empty one.
class SequenceSpace {
 public:
  static constexpr std::uint64_t kDefaultDenseCap = std::uint64_t{1} << 20;

  SequenceSpace(std::string alphabet, int length,
                std::uint64_t dense_cap = kDefaultDenseCap);

  int alpha() const { return static_cast<int>(alphabet_.size()); }
  int length() const { return length_; }
  const std::string& alphabet() const { return alphabet_; }
  std::uint64_t dense_cap() const { return dense_cap_; }

  /// alpha^l; throws SizeGuardError when it does not fit in 64 bits.
  std::uint64_t sequence_count() const;
  /// (alpha+1)^l; throws SizeGuardError when it does not fit in 64 bits.
  std::uint64_t subsequence_count() const;

  /// Throws SizeGuardError unless alpha^l <= dense_cap.
  void require_dense() const;
  /// Throws SizeGuardError unless (alpha+1)^l <= dense_cap.
  void require_dense_weights() const;

  int symbol_index(char c) const;  // -1 when c is not in the alphabet
  void validate(const Sequence& x) const;
  void validate(const Subsequence& sub) const;

  Sequence parse_sequence(std::string_view text) const;
  std::string format(const Sequence& x) const;
  /// "2:b;5:e" style, 1-based positions, "-" for the empty subsequence.
  /// Positions may arrive in any order and are canonicalized.
  Subsequence parse_subsequence(std::string_view text) const;
  std::string format(const Subsequence& sub) const;

  std::uint64_t index_of(const Sequence& x) const;
  Sequence sequence_at(std::uint64_t index) const;
  std::uint64_t index_of(const Subsequence& sub) const;
  Subsequence subsequence_at(std::uint64_t index) const;

  std::vector<Sequence> enumerate() const;
  std::vector<Subsequence> enumerate_subseq() const;

  /// Every subsequence supported on exactly the positions in `mask`.
  std::vector<Subsequence> subsequences_on(std::uint64_t mask) const;

  friend bool operator==(const SequenceSpace& a, const SequenceSpace& b) {
    return a.alphabet_ == b.alphabet_ && a.length_ == b.length_;
  }

 private:
  std::string alphabet_;
  int length_;
  std::uint64_t dense_cap_;
};

int hamming(const Sequence& x, const Sequence& y);
bool subseq_indicator(const Sequence& x, const Subsequence& sub);

/// The alpha^l x (alpha+1)^l indicator matrix Phi_{x,(S,s)} = [x[S] == s].
Eigen::MatrixXd phi_dense(const SequenceSpace& space);
/// Rows of Phi for the listed sequences (duplicates kept).
Eigen::MatrixXd phi_rows(const SequenceSpace& space, const std::vector<Sequence>& xs);

/// C(n, k) in exact 64-bit arithmetic; 0 when k > n. Throws OverflowError.
std::int64_t binomial(int n, int k);
/// base^exp in exact 64-bit arithmetic. Throws OverflowError.
std::int64_t checked_pow(std::int64_t base, int exp);
/// Krawtchouk polynomial K_k(d; l, alpha) in exact arithmetic.
std::int64_t krawtchouk(int k, int d, int length, int alpha);

}  // namespace seqgp
