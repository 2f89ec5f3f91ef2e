#include "biasbench/similarity.hpp"

#include <algorithm>
#include <cctype>

namespace biasbench {

std::string fold_case(std::string_view text) {
  std::string out(text);
  for (char& c : out) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return out;
}

std::string normalize_text(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  bool pending_space = false;
  for (char raw : text) {
    const auto c = static_cast<unsigned char>(raw);
    if (c < 0x80 && (std::isspace(c) || c == '-' || c == '/' || c == '_')) {
      pending_space = true;
      continue;
    }
    if (c < 0x80 && std::ispunct(c)) continue;
    if (pending_space && !out.empty()) out.push_back(' ');
    pending_space = false;
    out.push_back(c >= 'A' && c <= 'Z' ? static_cast<char>(c - 'A' + 'a') : raw);
  }
  return out;
}

PatternDistance::PatternDistance(std::string_view pattern)
    : size_(pattern.size()), blocks_((pattern.size() + 63) / 64) {
  peq_.assign(256 * blocks_, 0);
  for (std::size_t i = 0; i < pattern.size(); ++i) {
    const auto c = static_cast<unsigned char>(pattern[i]);
    peq_[c * blocks_ + i / 64] |= std::uint64_t{1} << (i % 64);
  }
  pv_.resize(blocks_);
  mv_.resize(blocks_);
}

std::size_t PatternDistance::distance(std::string_view text) const {
  if (size_ == 0) return text.size();
  if (text.empty()) return size_;
  std::fill(pv_.begin(), pv_.end(), ~std::uint64_t{0});
  std::fill(mv_.begin(), mv_.end(), 0);
  const std::size_t last_bit = (size_ - 1) % 64;
  const std::uint64_t high = std::uint64_t{1} << 63;
  std::size_t score = size_;

  for (char raw : text) {
    const std::uint64_t* eq_row = &peq_[static_cast<unsigned char>(raw) * blocks_];
    int hin = 1;  // first row of the global distance matrix grows by one per column
    for (std::size_t b = 0; b < blocks_; ++b) {
      std::uint64_t pv = pv_[b];
      std::uint64_t mv = mv_[b];
      std::uint64_t eq = eq_row[b];
      const std::uint64_t xv = eq | mv;
      if (hin < 0) eq |= 1;
      const std::uint64_t xh = (((eq & pv) + pv) ^ pv) | eq;
      std::uint64_t ph = mv | ~(xh | pv);
      std::uint64_t mh = pv & xh;

      if (b + 1 == blocks_) {
        if ((ph >> last_bit) & 1U) ++score;
        if ((mh >> last_bit) & 1U) --score;
      }
      int hout = 0;
      if (ph & high) hout = 1;
      if (mh & high) hout = -1;

      ph <<= 1;
      mh <<= 1;
      if (hin < 0) {
        mh |= 1;
      } else if (hin > 0) {
        ph |= 1;
      }
      pv_[b] = mh | ~(xv | ph);
      mv_[b] = ph & xv;
      hin = hout;
    }
  }
  return score;
}

double PatternDistance::similarity(std::string_view text) const {
  const std::size_t longest = std::max(size_, text.size());
  if (longest == 0) return 1.0;
  return 1.0 - static_cast<double>(distance(text)) / static_cast<double>(longest);
}

std::size_t edit_distance(std::string_view a, std::string_view b) {
  if (a.size() < b.size()) std::swap(a, b);
  return PatternDistance(b).distance(a);
}

double similarity(std::string_view a, std::string_view b) {
  const std::string fa = fold_case(a);
  const std::string fb = fold_case(b);
  const std::size_t longest = std::max(fa.size(), fb.size());
  if (longest == 0) return 1.0;
  return 1.0 - static_cast<double>(edit_distance(fa, fb)) / static_cast<double>(longest);
}

}  // namespace biasbench
