// Copyright 2026 The advfuzz Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// "goat": a deliberately flawed recursive-descent parser for a JSON-like
// document language, used as the built-in fuzzing target.
//
// Grammar (informal):
//   doc       := [header] ws value ws
//   header    := 0x7F "GOAT" version flags
//   value     := object | array | string | number | keyword | blob | directive
//   object    := '{' [member (',' member)*] '}'      member := string ':' value
//   array     := '[' [value (',' value)*] ']'
//   string    := '"' ... '"' | '\'' ... '\''          (escapes, \uXXXX, UTF-8)
//   number    := ['-'] digits ['.' digits] [e [+-] digits] | 0x hexdigits
//   keyword   := true | false | null | NaN | Infinity
//   blob      := '#' digits ':' raw-bytes              (length-prefixed)
//   directive := '@' name '(' [args] ')'
//   comments  := '//' ... '\n' | '/*' ... '*/'
//
// Seeded bugs are reported through TraceSink::Crash() with the ids listed in
// the manifest at the bottom of this file. Syntax errors are not bugs: the
// parser just stops and the run ends with an Ok outcome.
#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <string_view>

#include "advfuzz/harness.h"

namespace advfuzz {
namespace {

constexpr int kCounterBase = __COUNTER__ + 1;

// Odd multiplier keeps location ids distinct modulo 2^16.
constexpr uint32_t Loc(uint32_t n) {
  return (n * 0x9E37u + 0x5A5Bu) & 0xFFFFu;
}

#define T() sink_.Visit(Loc(__COUNTER__))

enum BugId : int {
  kBugHeaderVersion = 1,
  kBugDepthOverflow = 2,
  kBugBlobLength = 3,
  kBugIntegerOverflow = 4,
  kBugNulKey = 5,
  kBugDuplicateId = 6,
  kBugSizeMismatch = 7,
  kBugUnterminatedComment = 8,
  kBugHexOverflow = 9,
  kBugExponentUnderflow = 10,
  kBugCodepointOverflow = 11,
  kBugGainOverflow = 12,
};

constexpr int kMaxDepth = 24;

struct SyntaxError {};

enum class Kind { kNone, kObject, kArray, kString, kNumber, kBool, kNull,
                  kSpecial, kBlob, kDirective };

struct Val {
  Kind kind = Kind::kNone;
  double number = 0;
  bool integral = false;
  bool truth = false;
  std::string text;   // strings and blobs
  int count = 0;      // array elements / object members
  Kind first = Kind::kNone;
};

class Parser {
 public:
  Parser(std::span<const uint8_t> in, TraceSink& sink) : in_(in), sink_(sink) {}

  void Document() {
    T();
    if (Peek() == 0x7F) {
      T();
      Header();
    }
    Ws();
    if (AtEnd()) {
      T();
      return;
    }
    Val v = Value(0);
    Ws();
    if (!AtEnd()) {
      T();
      Fail();
    }
    switch (v.kind) {
      case Kind::kObject: T(); break;
      case Kind::kArray: T(); break;
      case Kind::kString: T(); break;
      case Kind::kNumber: T(); break;
      default: T(); break;
    }
  }

 private:
  bool AtEnd() const { return pos_ >= in_.size(); }
  int Peek(size_t ahead = 0) const {
    return pos_ + ahead < in_.size() ? in_[pos_ + ahead] : -1;
  }
  int Take() { return AtEnd() ? -1 : in_[pos_++]; }
  [[noreturn]] void Fail() { throw SyntaxError{}; }
  void Expect(int c) {
    if (Take() != c) Fail();
  }

  // ---- header -------------------------------------------------------------

  void Header() {
    ++pos_;
    static constexpr std::string_view kMagic = "GOAT";
    if (Take() != kMagic[0]) { T(); Fail(); }
    T();
    if (Take() != kMagic[1]) { T(); Fail(); }
    T();
    if (Take() != kMagic[2]) { T(); Fail(); }
    T();
    if (Take() != kMagic[3]) { T(); Fail(); }
    T();
    const int version = Take();
    if (version < 0) { T(); Fail(); }
    if (version < 0x10) {
      T();
    } else if (version < 0x40) {
      T();
    } else if (version < 0x80) {
      T();
    } else if (version < 0xC0) {
      T();
    } else if (version < 0xF0) {
      T();
    } else {
      T();
      sink_.Crash(kBugHeaderVersion);
    }
    const int flags = Take();
    if (flags < 0) { T(); Fail(); }
    if (flags & 0x01) T();
    if (flags & 0x02) T();
    if (flags & 0x04) T();
    if (flags & 0x08) T();
    if (flags & 0x10) T();
    if (flags & 0x20) T();
    if (flags & 0x40) T();
    if (flags & 0x80) {
      T();
      strict_ = true;
    }
    if (flags & 0x02) Gains();
  }

  // Eight gain stages; each one only engages when every earlier stage did
  // and its own byte clears a rising threshold. Driving all eight overflows
  // the mixer.
  bool Gate(int stage) {
    static constexpr int kThreshold[8] = {0x50, 0x60, 0x70, 0x80,
                                          0x90, 0xA0, 0xB0, 0xC0};
    const int b = Take();
    if (b < 0) Fail();
    return b > kThreshold[stage];
  }

  void Gains() {
    const size_t start = pos_;
    T();
    if (!Gate(0)) { T(); pos_ = start + 8; return; }
    T();
    if (!Gate(1)) { T(); pos_ = start + 8; return; }
    T();
    if (!Gate(2)) { T(); pos_ = start + 8; return; }
    T();
    if (!Gate(3)) { T(); pos_ = start + 8; return; }
    T();
    if (!Gate(4)) { T(); pos_ = start + 8; return; }
    T();
    if (!Gate(5)) { T(); pos_ = start + 8; return; }
    T();
    if (!Gate(6)) { T(); pos_ = start + 8; return; }
    T();
    if (!Gate(7)) { T(); pos_ = start + 8; return; }
    T();
    sink_.Crash(kBugGainOverflow);
  }

  // ---- whitespace and comments -------------------------------------------

  void Ws() {
    for (;;) {
      switch (Peek()) {
        case ' ': T(); ++pos_; break;
        case '\t': T(); ++pos_; break;
        case '\n': T(); ++pos_; break;
        case '\r': T(); ++pos_; break;
        case '/':
          T();
          Comment();
          break;
        default:
          return;
      }
    }
  }

  void Comment() {
    ++pos_;
    const int c = Take();
    if (c == '/') {
      T();
      while (!AtEnd() && Peek() != '\n') {
        T();
        ++pos_;
      }
      return;
    }
    if (c != '*') { T(); Fail(); }
    T();
    for (;;) {
      if (AtEnd()) {
        T();
        sink_.Crash(kBugUnterminatedComment);
      }
      const int d = Take();
      if (d == '*' && Peek() == '/') {
        T();
        ++pos_;
        return;
      }
      if (d == '\n') T();
      else T();
    }
  }

  // ---- values ---------------------------------------------------------------

  Val Value(int depth) {
    if (depth > kMaxDepth) {
      T();
      sink_.Crash(kBugDepthOverflow);
    }
    if (depth > 8) T();
    else if (depth > 4) T();
    else if (depth > 1) T();
    switch (Peek()) {
      case '{': T(); return Object(depth + 1);
      case '[': T(); return Array(depth + 1);
      case '"': T(); return String('"', false);
      case '\'': T(); return String('\'', false);
      case '-': T(); return Number();
      case '0': case '1': case '2': case '3': case '4':
      case '5': case '6': case '7': case '8': case '9':
        T();
        return Number();
      case 't': T(); return Keyword("true", Kind::kBool, true);
      case 'f': T(); return Keyword("false", Kind::kBool, false);
      case 'n': T(); return Keyword("null", Kind::kNull, false);
      case 'N': T(); return Keyword("NaN", Kind::kSpecial, false);
      case 'I': T(); return Keyword("Infinity", Kind::kSpecial, true);
      case '#': T(); return Blob();
      case '@': T(); return Directive(depth);
      case -1: T(); Fail();
      default:
        T();
        Fail();
    }
  }

  Val Keyword(std::string_view word, Kind kind, bool truth) {
    for (size_t i = 0; i < word.size(); ++i) {
      if (Take() != word[i]) {
        if (i == 1) T();
        else if (i == 2) T();
        else T();
        Fail();
      }
    }
    Val v;
    v.kind = kind;
    v.truth = truth;
    if (kind == Kind::kBool) {
      if (truth) T();
      else T();
    } else if (kind == Kind::kNull) {
      T();
    } else if (truth) {
      T();
      v.number = INFINITY;
    } else {
      T();
      v.number = NAN;
    }
    return v;
  }

  // ---- strings --------------------------------------------------------------

  int HexDigit(int c) {
    if (c >= '0' && c <= '9') { T(); return c - '0'; }
    if (c >= 'a' && c <= 'f') { T(); return c - 'a' + 10; }
    if (c >= 'A' && c <= 'F') { T(); return c - 'A' + 10; }
    T();
    Fail();
  }

  uint32_t Hex4() {
    uint32_t cp = 0;
    for (int i = 0; i < 4; ++i) cp = (cp << 4) | HexDigit(Take());
    return cp;
  }

  void AppendUtf8(std::string& out, uint32_t cp) {
    if (cp < 0x80) {
      T();
      out += static_cast<char>(cp);
    } else if (cp < 0x800) {
      T();
      out += static_cast<char>(0xC0 | (cp >> 6));
      out += static_cast<char>(0x80 | (cp & 0x3F));
    } else if (cp < 0x10000) {
      T();
      out += static_cast<char>(0xE0 | (cp >> 12));
      out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
      out += static_cast<char>(0x80 | (cp & 0x3F));
    } else {
      T();
      out += static_cast<char>(0xF0 | (cp >> 18));
      out += static_cast<char>(0x80 | ((cp >> 12) & 0x3F));
      out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
      out += static_cast<char>(0x80 | (cp & 0x3F));
    }
  }

  void Escape(std::string& out, bool is_key) {
    const int c = Take();
    switch (c) {
      case '"': T(); out += '"'; break;
      case '\'': T(); out += '\''; break;
      case '\\': T(); out += '\\'; break;
      case '/': T(); out += '/'; break;
      case 'b': T(); out += '\b'; break;
      case 'f': T(); out += '\f'; break;
      case 'n': T(); out += '\n'; break;
      case 'r': T(); out += '\r'; break;
      case 't': T(); out += '\t'; break;
      case '0': T(); out += '\0'; break;
      case 'x': {
        T();
        const int hi = HexDigit(Take());
        const int lo = HexDigit(Take());
        out += static_cast<char>(hi * 16 + lo);
        break;
      }
      case 'u': {
        T();
        uint32_t cp = Hex4();
        if (cp == 0) {
          T();
          if (is_key) {
            T();
            sink_.Crash(kBugNulKey);
          }
        } else if (cp >= 0xD800 && cp <= 0xDBFF) {
          T();
          if (Take() != '\\' || Take() != 'u') { T(); Fail(); }
          const uint32_t lo = Hex4();
          if (lo < 0xDC00 || lo > 0xDFFF) { T(); Fail(); }
          T();
          cp = 0x10000 + ((cp - 0xD800) << 10) + (lo - 0xDC00);
        } else if (cp >= 0xDC00 && cp <= 0xDFFF) {
          T();
          Fail();
        } else if (cp >= 0xE000 && cp <= 0xF8FF) {
          T();  // private use area
        }
        AppendUtf8(out, cp);
        break;
      }
      case -1:
        T();
        Fail();
      default:
        T();
        if (strict_) { T(); Fail(); }
        out += static_cast<char>(c);
    }
  }

  // Validates one UTF-8 sequence whose lead byte was already consumed.
  void Utf8(std::string& out, int lead) {
    int extra = 0;
    uint32_t cp = 0;
    if (lead < 0xC0) {
      T();  // stray continuation byte
      Fail();
    } else if (lead < 0xE0) {
      T();
      extra = 1;
      cp = lead & 0x1F;
    } else if (lead < 0xF0) {
      T();
      extra = 2;
      cp = lead & 0x0F;
    } else if (lead < 0xF8) {
      T();
      extra = 3;
      cp = lead & 0x07;
    } else {
      T();
      Fail();
    }
    out += static_cast<char>(lead);
    for (int i = 0; i < extra; ++i) {
      const int c = Take();
      if (c < 0x80 || c > 0xBF) {
        if (i == 0) T();
        else T();
        Fail();
      }
      if (i == 0) T();
      else if (i == 1) T();
      else T();
      cp = (cp << 6) | (c & 0x3F);
      out += static_cast<char>(c);
    }
    if (extra == 1 && cp < 0x80) { T(); Fail(); }       // overlong
    if (extra == 2 && cp < 0x800) { T(); Fail(); }      // overlong
    if (extra == 3 && cp < 0x10000) { T(); Fail(); }    // overlong
    if (cp > 0x10FFFF) {
      T();
      sink_.Crash(kBugCodepointOverflow);
    }
    if (cp >= 0x1F300 && cp <= 0x1FAFF) T();  // pictographs
    else if (cp >= 0x4E00 && cp <= 0x9FFF) T();  // CJK
    else if (cp >= 0x0400 && cp <= 0x04FF) T();  // Cyrillic
    else if (cp >= 0x0370 && cp <= 0x03FF) T();  // Greek
    else T();
  }

  Val String(int quote, bool is_key) {
    ++pos_;
    Val v;
    v.kind = Kind::kString;
    for (;;) {
      const int c = Take();
      if (c < 0) {
        T();
        Fail();
      }
      if (c == quote) {
        T();
        break;
      }
      if (c == '\\') {
        T();
        Escape(v.text, is_key);
      } else if (c < 0x20) {
        T();
        if (strict_ || c == 0) { T(); Fail(); }
        v.text += static_cast<char>(c);
      } else if (c >= 0x80) {
        T();
        Utf8(v.text, c);
      } else if (c >= 'A' && c <= 'Z') {
        T();
        v.text += static_cast<char>(c);
      } else if (c >= 'a' && c <= 'z') {
        T();
        v.text += static_cast<char>(c);
      } else if (c >= '0' && c <= '9') {
        T();
        v.text += static_cast<char>(c);
      } else if (c == ' ') {
        T();
        v.text += ' ';
      } else {
        T();
        v.text += static_cast<char>(c);
      }
    }
    if (v.text.empty()) T();
    else if (v.text.size() < 4) T();
    else if (v.text.size() < 16) T();
    else if (v.text.size() < 64) T();
    else T();
    return v;
  }

  // ---- numbers --------------------------------------------------------------

  Val Number() {
    Val v;
    v.kind = Kind::kNumber;
    bool negative = false;
    if (Peek() == '-') {
      T();
      negative = true;
      ++pos_;
    }
    if (Peek() == '0' && (Peek(1) == 'x' || Peek(1) == 'X')) {
      T();
      pos_ += 2;
      return Hex(negative);
    }
    int digits = 0;
    uint64_t mantissa = 0;
    if (Peek() == '0') {
      T();
      ++pos_;
      digits = 1;
      if (Peek() >= '0' && Peek() <= '9') {
        T();  // leading zero
        if (strict_) Fail();
      }
    }
    while (Peek() >= '0' && Peek() <= '9') {
      if (digits == 0) T();
      else if (digits < 9) T();
      else T();
      mantissa = mantissa * 10 + (Take() - '0');
      ++digits;
    }
    if (digits == 0) {
      T();
      Fail();
    }
    if (digits > 18) {
      T();
      sink_.Crash(kBugIntegerOverflow);
    }
    double value = static_cast<double>(mantissa);
    v.integral = true;
    if (Peek() == '.') {
      T();
      ++pos_;
      v.integral = false;
      int frac = 0;
      double scale = 0.1;
      while (Peek() >= '0' && Peek() <= '9') {
        if (frac == 0) T();
        else T();
        value += scale * (Take() - '0');
        scale *= 0.1;
        ++frac;
      }
      if (frac == 0) {
        T();
        Fail();
      }
      if (frac > 6) T();
    }
    if (Peek() == 'e' || Peek() == 'E') {
      T();
      ++pos_;
      v.integral = false;
      bool exp_negative = false;
      if (Peek() == '-') {
        T();
        exp_negative = true;
        ++pos_;
      } else if (Peek() == '+') {
        T();
        ++pos_;
      }
      int exp_digits = 0;
      int exponent = 0;
      while (Peek() >= '0' && Peek() <= '9') {
        if (exp_digits == 0) T();
        else T();
        if (exponent < 100000) exponent = exponent * 10 + (Take() - '0');
        else ++pos_;
        ++exp_digits;
      }
      if (exp_digits == 0) {
        T();
        Fail();
      }
      if (exp_negative) {
        if (exponent > 400) {
          T();
          sink_.Crash(kBugExponentUnderflow);
        }
        if (exponent > 300) T();
        else if (exponent > 30) T();
        else T();
        value *= std::pow(10.0, -exponent);
      } else {
        if (exponent > 308) {
          T();
          value = INFINITY;
        } else {
          if (exponent > 30) T();
          else T();
          value *= std::pow(10.0, exponent);
        }
      }
    }
    v.number = negative ? -value : value;
    Classify(v);
    return v;
  }

  Val Hex(bool negative) {
    Val v;
    v.kind = Kind::kNumber;
    v.integral = true;
    int digits = 0;
    uint64_t value = 0;
    for (;;) {
      const int c = Peek();
      const bool is_hex = (c >= '0' && c <= '9') || (c >= 'a' && c <= 'f') ||
                          (c >= 'A' && c <= 'F');
      if (!is_hex) break;
      value = (value << 4) | HexDigit(Take());
      ++digits;
    }
    if (digits == 0) {
      T();
      Fail();
    }
    if (digits > 8) {
      T();
      sink_.Crash(kBugHexOverflow);
    }
    if (digits > 4) T();
    else if (digits > 2) T();
    else T();
    v.number = negative ? -static_cast<double>(value) : static_cast<double>(value);
    Classify(v);
    return v;
  }

  void Classify(const Val& v) {
    const double x = v.number;
    if (std::isinf(x)) T();
    else if (x == 0) T();
    else if (x < -1000) T();
    else if (x < 0) T();
    else if (x < 1) T();
    else if (x < 10) T();
    else if (x < 1000) T();
    else if (x < 1e6) T();
    else T();
  }

  // ---- blobs ----------------------------------------------------------------

  Val Blob() {
    ++pos_;
    Val v;
    v.kind = Kind::kBlob;
    size_t declared = 0;
    int digits = 0;
    while (Peek() >= '0' && Peek() <= '9') {
      if (digits == 0) T();
      else T();
      if (declared < 1'000'000) declared = declared * 10 + (Take() - '0');
      else ++pos_;
      ++digits;
    }
    if (digits == 0) {
      T();
      Fail();
    }
    if (Take() != ':') {
      T();
      Fail();
    }
    const size_t remaining = in_.size() - pos_;
    if (declared > remaining) {
      // Copies `declared` bytes regardless of what is left.
      T();
      sink_.Crash(kBugBlobLength);
    }
    if (declared == 0) T();
    else if (declared < 8) T();
    else T();
    bool binary = false;
    for (size_t i = 0; i < declared; ++i) {
      const uint8_t b = in_[pos_ + i];
      if (b >= 0x80 || b < 0x20) binary = true;
      v.text += static_cast<char>(b);
    }
    pos_ += declared;
    if (binary) T();
    else T();
    return v;
  }

  // ---- directives -----------------------------------------------------------

  std::string Identifier() {
    std::string id;
    while ((Peek() >= 'a' && Peek() <= 'z') || Peek() == '_') {
      T();
      id += static_cast<char>(Take());
    }
    return id;
  }

  Val Directive(int depth) {
    ++pos_;
    Val v;
    v.kind = Kind::kDirective;
    const std::string name = Identifier();
    if (name.empty()) {
      T();
      Fail();
    }
    Ws();
    if (Take() != '(') {
      T();
      Fail();
    }
    Ws();
    if (name == "wait") {
      T();
      Val n = Number();
      if (!n.integral || n.number < 0) {
        T();
        Fail();
      }
      if (n.number == 0) {
        // Seeded hang: waits for an event that never arrives.
        T();
        for (;;) T();
      }
      const int spins = static_cast<int>(std::min(n.number, 64.0));
      for (int i = 0; i < spins; ++i) T();
    } else if (name == "repeat") {
      T();
      Val n = Number();
      Ws();
      Expect(',');
      Ws();
      Val inner = Value(depth + 1);
      if (n.number > 100) T();
      else if (n.number > 10) T();
      else T();
      if (inner.kind == Kind::kObject) T();
      else T();
    } else if (name == "include") {
      T();
      Val path = String('"', false);
      if (path.text.find("..") != std::string::npos) T();
      else if (!path.text.empty() && path.text[0] == '/') T();
      else T();
    } else if (name == "version") {
      T();
      Val n = Number();
      if (n.number >= 3) T();
      else if (n.number >= 2) T();
      else T();
    } else if (name == "strict") {
      T();
      strict_ = true;
    } else {
      T();
      Fail();
    }
    Ws();
    if (Take() != ')') {
      T();
      Fail();
    }
    T();
    return v;
  }

  // ---- containers -----------------------------------------------------------

  Val Array(int depth) {
    ++pos_;
    Val v;
    v.kind = Kind::kArray;
    Ws();
    if (Peek() == ']') {
      T();
      ++pos_;
      return v;
    }
    Kind last = Kind::kNone;
    bool mixed = false;
    for (;;) {
      Ws();
      Val e = Value(depth);
      if (v.count == 0) {
        v.first = e.kind;
      } else if (e.kind != last) {
        if (!mixed) T();
        mixed = true;
      }
      last = e.kind;
      ++v.count;
      Ws();
      const int c = Take();
      if (c == ',') {
        T();
        if (Peek() == ']' || (Ws(), Peek() == ']')) {
          T();  // trailing comma
          if (strict_) Fail();
          ++pos_;
          break;
        }
        continue;
      }
      if (c == ']') {
        T();
        break;
      }
      T();
      Fail();
    }
    if (v.count == 1) T();
    else if (v.count < 4) T();
    else if (v.count < 16) T();
    else T();
    if (mixed) T();
    return v;
  }

  struct ObjectState {
    bool has_id = false;
    bool has_size = false;
    bool has_items = false;
    double size = 0;
    int items = 0;
    int known = 0;
  };

  Val Object(int depth) {
    ++pos_;
    Val v;
    v.kind = Kind::kObject;
    ObjectState st;
    Ws();
    if (Peek() == '}') {
      T();
      ++pos_;
      return v;
    }
    for (;;) {
      Ws();
      if (Peek() != '"' && Peek() != '\'') {
        T();
        Fail();
      }
      Val key = String(Peek(), true);
      Ws();
      if (Take() != ':') {
        T();
        Fail();
      }
      Ws();
      Val value = Value(depth);
      Member(key.text, value, st);
      ++v.count;
      Ws();
      const int c = Take();
      if (c == ',') {
        T();
        continue;
      }
      if (c == '}') {
        T();
        break;
      }
      T();
      Fail();
    }
    if (st.has_size && st.has_items) {
      T();
      if (st.size > st.items + 4) {
        // Allocates `items` slots and then walks `size` of them.
        T();
        sink_.Crash(kBugSizeMismatch);
      }
      if (st.size == st.items) T();
      else T();
    }
    if (st.known == v.count) T();
    else if (st.known == 0) T();
    else T();
    if (v.count > 16) T();
    else if (v.count > 4) T();
    return v;
  }

  static bool IsHexString(const std::string& s) {
    if (s.empty()) return false;
    for (char c : s) {
      const bool ok = (c >= '0' && c <= '9') || (c >= 'a' && c <= 'f');
      if (!ok) return false;
    }
    return true;
  }

  void Member(const std::string& key, const Val& value, ObjectState& st) {
    if (key.empty()) {
      T();
      return;
    }
    switch (key[0]) {
      case 'c': T(); break;
      case 'd': T(); break;
      case 'e': T(); break;
      case 'i': T(); break;
      case 'm': T(); break;
      case 'n': T(); break;
      case 'r': T(); break;
      case 's': T(); break;
      case 't': T(); break;
      case 'v': T(); break;
      default: T(); return;
    }
    if (key == "id") {
      T();
      ++st.known;
      if (value.kind != Kind::kNumber) { T(); return; }
      if (st.has_id) {
        T();
        if (value.number < 0) {
          // Second id frees the node that the first id registered.
          T();
          sink_.Crash(kBugDuplicateId);
        }
      }
      st.has_id = true;
      if (!value.integral) T();
      else if (value.number < 0) T();
      else if (value.number > 65535) T();
      else T();
    } else if (key == "type") {
      T();
      ++st.known;
      if (value.kind != Kind::kString) { T(); return; }
      if (value.text == "node") T();
      else if (value.text == "leaf") T();
      else if (value.text == "root") T();
      else if (value.text == "ref") T();
      else if (value.text == "list") T();
      else T();
    } else if (key == "size") {
      T();
      ++st.known;
      if (value.kind != Kind::kNumber) { T(); return; }
      st.has_size = true;
      st.size = value.number;
      if (value.number < 0) T();
      else if (value.number > 1024) T();
      else T();
    } else if (key == "items") {
      T();
      ++st.known;
      if (value.kind != Kind::kArray) { T(); return; }
      st.has_items = true;
      st.items = value.count;
      if (value.first == Kind::kNumber) T();
      else if (value.first == Kind::kString) T();
      else if (value.first == Kind::kObject) T();
      else T();
    } else if (key == "name") {
      T();
      ++st.known;
      if (value.kind != Kind::kString) { T(); return; }
      if (value.text.empty()) T();
      else if (value.text[0] >= 'A' && value.text[0] <= 'Z') T();
      else if (static_cast<uint8_t>(value.text[0]) >= 0x80) T();
      else T();
    } else if (key == "version") {
      T();
      ++st.known;
      if (value.kind == Kind::kString) {
        T();
        if (value.text.size() >= 3 && value.text[1] == '.') T();
      } else if (value.kind == Kind::kNumber) {
        if (value.number >= 3) T();
        else if (value.number >= 2) T();
        else if (value.number >= 1) T();
        else T();
      } else {
        T();
      }
    } else if (key == "tags") {
      T();
      ++st.known;
      if (value.kind != Kind::kArray) { T(); return; }
      if (value.first == Kind::kString) T();
      else T();
    } else if (key == "enabled") {
      T();
      ++st.known;
      if (value.kind != Kind::kBool) { T(); return; }
      if (value.truth) T();
      else T();
    } else if (key == "ratio") {
      T();
      ++st.known;
      if (value.kind != Kind::kNumber) { T(); return; }
      if (value.number < 0 || value.number > 1) T();
      else if (value.number > 0.5) T();
      else T();
    } else if (key == "children") {
      T();
      ++st.known;
      if (value.kind != Kind::kArray) { T(); return; }
      if (value.first == Kind::kObject) T();
      else T();
    } else if (key == "checksum") {
      T();
      ++st.known;
      if (value.kind != Kind::kString) { T(); return; }
      if (IsHexString(value.text)) {
        T();
        if (value.text.size() == 8) T();
      } else {
        T();
      }
    } else if (key == "encoding") {
      T();
      ++st.known;
      if (value.kind != Kind::kString) { T(); return; }
      if (value.text == "utf8") T();
      else if (value.text == "latin1") T();
      else if (value.text == "base64") T();
      else T();
    } else if (key == "meta") {
      T();
      ++st.known;
      if (value.kind == Kind::kObject) T();
      else if (value.kind == Kind::kNull) T();
      else T();
    } else if (key == "data") {
      T();
      ++st.known;
      if (value.kind == Kind::kBlob) T();
      else if (value.kind == Kind::kString) T();
      else T();
    } else if (key == "ref") {
      T();
      ++st.known;
      if (value.kind == Kind::kString && !value.text.empty() &&
          value.text[0] == '#') {
        T();
      } else {
        T();
      }
    } else {
      T();
    }
  }

  std::span<const uint8_t> in_;
  TraceSink& sink_;
  size_t pos_ = 0;
  bool strict_ = false;
};

constexpr int kCounterEnd = __COUNTER__;
#undef T

class GoatTarget final : public FuzzTarget {
 public:
  GoatTarget() {
    manifest_ = {
        {kBugHeaderVersion, "header version byte >= 0xF0 overflows version table",
         Bytes{0x7F, 'G', 'O', 'A', 'T', 0xF5, 0x00, '{', '}'}},
        {kBugDepthOverflow, "nesting deeper than 24 overflows the parse stack",
         ToBytes("[[[[[[[[[[[[[[[[[[[[[[[[[[1]]]]]]]]]]]]]]]]]]]]]]]]]")},
        {kBugBlobLength, "blob length prefix larger than remaining input",
         ToBytes("#9:abc")},
        {kBugIntegerOverflow, "integer literal with more than 18 digits",
         ToBytes("1234567890123456789")},
        {kBugNulKey, "\\u0000 escape inside an object key",
         ToBytes("{\"a\\u0000\":1}")},
        {kBugDuplicateId, "repeated id key with negative value frees live node",
         ToBytes("{\"id\":1,\"id\":-1}")},
        {kBugSizeMismatch, "size field exceeds items length by more than 4",
         ToBytes("{\"size\":9,\"items\":[1]}")},
        {kBugUnterminatedComment, "block comment running off the end of input",
         ToBytes("[1]/*")},
        {kBugHexOverflow, "hex literal with more than 8 digits",
         ToBytes("0x123456789")},
        {kBugExponentUnderflow, "negative exponent beyond -400",
         ToBytes("1e-401")},
        {kBugCodepointOverflow, "4-byte UTF-8 sequence above U+10FFFF",
         Bytes{'"', 0xF4, 0x90, 0x80, 0x80, '"'}},
        {kBugGainOverflow, "all eight header gain stages engaged",
         Bytes{0x7F, 'G', 'O', 'A', 'T', 0x01, 0x02, 0x51, 0x61, 0x71, 0x81,
               0x91, 0xA1, 0xB1, 0xC1}},
    };
  }

  std::string_view name() const override { return "goat"; }

  void Run(std::span<const uint8_t> input, TraceSink& sink) const override {
    Parser parser(input, sink);
    try {
      parser.Document();
    } catch (const SyntaxError&) {
      // Malformed documents are rejected, not crashes.
    }
  }

  const std::vector<BugInfo>& manifest() const override { return manifest_; }

  std::vector<Bytes> seeds() const override {
    return {
        ToBytes("{}"),
        ToBytes("{\"id\":1,\"name\":\"goat\",\"tags\":[\"a\",\"b\"]}"),
        ToBytes("[1,2.5,-3e2,\"x\",true,null]"),
        ToBytes("{\"type\":\"node\",\"size\":2,\"items\":[{},[]]}"),
        ToBytes("\x7FGOAT\x01\x02\x30\x30\x30\x30\x30\x30\x30\x30{\"id\":7}"),
    };
  }

 private:
  std::vector<BugInfo> manifest_;
};

}  // namespace

const FuzzTarget& BuiltinGoat() {
  static const GoatTarget target;
  return target;
}

size_t GoatLocationCount() {
  return static_cast<size_t>(kCounterEnd - kCounterBase);
}

}  // namespace advfuzz
