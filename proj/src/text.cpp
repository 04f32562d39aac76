#include <unicode/normalizer2.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>
#include <unicode/utf8.h>

#include <vector>

#include "docrect/error.hpp"
#include "docrect/metrics.hpp"

namespace docrect {

std::u32string normalize_text(const std::string& utf8) {
  for (std::int32_t i = 0, n = static_cast<std::int32_t>(utf8.size()); i < n;) {
    UChar32 c;
    U8_NEXT(reinterpret_cast<const std::uint8_t*>(utf8.data()), i, n, c);
    if (c < 0) throw FormatError("text is not valid UTF-8 near byte " + std::to_string(i - 1));
  }
  UErrorCode status = U_ZERO_ERROR;
  const icu::Normalizer2* nfc = icu::Normalizer2::getNFCInstance(status);
  if (U_FAILURE(status)) throw Error(ErrorKind::internal, std::string("ICU NFC unavailable: ") + u_errorName(status));
  const icu::UnicodeString normalized = nfc->normalize(icu::UnicodeString::fromUTF8(utf8), status);
  if (U_FAILURE(status)) throw Error(ErrorKind::internal, std::string("NFC normalisation failed: ") + u_errorName(status));

  std::u32string out;
  bool pending_space = false;
  for (std::int32_t i = 0; i < normalized.length();) {
    const UChar32 c = normalized.char32At(i);
    i += U16_LENGTH(c);
    if (u_isUWhiteSpace(c)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out.push_back(U' ');
    pending_space = false;
    out.push_back(static_cast<char32_t>(c));
  }
  return out;
}

EditCounts edit_distance(const std::u32string& hyp, const std::u32string& ref) {
  const std::size_t m = hyp.size(), n = ref.size();
  std::vector<std::uint32_t> d((m + 1) * (n + 1));
  auto at = [&](std::size_t i, std::size_t j) -> std::uint32_t& { return d[i * (n + 1) + j]; };
  for (std::size_t i = 0; i <= m; ++i) at(i, 0) = static_cast<std::uint32_t>(i);
  for (std::size_t j = 0; j <= n; ++j) at(0, j) = static_cast<std::uint32_t>(j);
  for (std::size_t i = 1; i <= m; ++i)
    for (std::size_t j = 1; j <= n; ++j)
      at(i, j) = std::min({at(i - 1, j - 1) + (hyp[i - 1] != ref[j - 1] ? 1u : 0u), at(i - 1, j) + 1, at(i, j - 1) + 1});

  EditCounts c;
  c.distance = at(m, n);
  std::size_t i = m, j = n;
  while (i > 0 || j > 0) {
    if (i > 0 && j > 0) {
      const std::uint32_t sub = hyp[i - 1] != ref[j - 1] ? 1u : 0u;
      if (at(i, j) == at(i - 1, j - 1) + sub) {
        c.substitutions += sub;
        --i;
        --j;
        continue;
      }
    }
    if (i > 0 && at(i, j) == at(i - 1, j) + 1) {
      ++c.deletions;
      --i;
    } else {
      ++c.insertions;
      --j;
    }
  }
  return c;
}

EditCounts edit_distance(const std::string& hyp, const std::string& ref) {
  return edit_distance(normalize_text(hyp), normalize_text(ref));
}

double cer(const std::u32string& hyp, const std::u32string& ref) {
  if (ref.empty()) throw ParameterError("cer: reference text is empty");
  return static_cast<double>(edit_distance(hyp, ref).distance) / static_cast<double>(ref.size());
}

double cer(const std::string& hyp, const std::string& ref) { return cer(normalize_text(hyp), normalize_text(ref)); }

}  // namespace docrect
