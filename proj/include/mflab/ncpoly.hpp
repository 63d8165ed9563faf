#pragma once

#include <algorithm>
#include <charconv>
#include <complex>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "mflab/matrix.hpp"

namespace mflab {

/// One indeterminate occurrence: X<index> or its adjoint X<index>'.
struct Letter {
    int index = 1;    ///< 1-based
    bool starred = false;

    friend bool operator==(const Letter& a, const Letter& b) {
        return a.index == b.index && a.starred == b.starred;
    }
    friend bool operator<(const Letter& a, const Letter& b) {
        if (a.index != b.index) return a.index < b.index;
        return a.starred < b.starred; // unstarred before starred
    }
};

using Word = std::vector<Letter>;

/// Graded lexicographic order: degree first, then letter-wise.
inline bool word_less(const Word& a, const Word& b) {
    if (a.size() != b.size()) return a.size() < b.size();
    return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

struct ParseError : std::runtime_error {
    std::size_t offset;
    ParseError(const std::string& msg, std::size_t off)
        : std::runtime_error(msg + " (byte " + std::to_string(off) + ")"), offset(off) {}
};

/// Noncommutative *-polynomial with complex coefficients, kept in canonical
/// form: terms sorted graded-lexicographically, like words merged, exact-zero
/// coefficients dropped.
class NCPoly {
  public:
    struct Term {
        Complex coeff;
        Word word;
    };

    NCPoly() = default;
    explicit NCPoly(int num_vars) : num_vars_(num_vars) {
        if (num_vars < 0) throw std::invalid_argument("NCPoly: negative variable count");
    }
    NCPoly(int num_vars, std::vector<Term> terms) : num_vars_(num_vars), terms_(std::move(terms)) {
        normalize();
    }

    static NCPoly constant(int num_vars, Complex c) {
        NCPoly p(num_vars);
        p.terms_.push_back({c, {}});
        p.normalize();
        return p;
    }
    static NCPoly variable(int num_vars, int index, bool starred = false) {
        NCPoly p(num_vars);
        p.terms_.push_back({Complex(1.0, 0.0), {Letter{index, starred}}});
        p.normalize();
        return p;
    }

    int num_vars() const { return num_vars_; }
    const std::vector<Term>& terms() const { return terms_; }
    bool is_zero() const { return terms_.empty(); }
    std::size_t degree() const {
        std::size_t d = 0;
        for (const auto& t : terms_) d = std::max(d, t.word.size());
        return d;
    }

    friend bool operator==(const NCPoly& a, const NCPoly& b) {
        if (a.num_vars_ != b.num_vars_ || a.terms_.size() != b.terms_.size()) return false;
        for (std::size_t i = 0; i < a.terms_.size(); ++i)
            if (a.terms_[i].coeff != b.terms_[i].coeff || !(a.terms_[i].word == b.terms_[i].word))
                return false;
        return true;
    }

    NCPoly operator+(const NCPoly& o) const {
        check_same_arity(o);
        std::vector<Term> ts = terms_;
        ts.insert(ts.end(), o.terms_.begin(), o.terms_.end());
        return NCPoly(num_vars_, std::move(ts));
    }
    NCPoly operator-(const NCPoly& o) const { return *this + (o * Complex(-1.0, 0.0)); }
    NCPoly operator*(Complex c) const {
        std::vector<Term> ts = terms_;
        for (auto& t : ts) t.coeff *= c;
        return NCPoly(num_vars_, std::move(ts));
    }
    NCPoly operator*(const NCPoly& o) const {
        check_same_arity(o);
        std::vector<Term> ts;
        ts.reserve(terms_.size() * o.terms_.size());
        for (const auto& a : terms_)
            for (const auto& b : o.terms_) {
                Word w = a.word;
                w.insert(w.end(), b.word.begin(), b.word.end());
                ts.push_back({a.coeff * b.coeff, std::move(w)});
            }
        return NCPoly(num_vars_, std::move(ts));
    }

  private:
    void check_same_arity(const NCPoly& o) const {
        if (num_vars_ != o.num_vars_)
            throw std::invalid_argument("NCPoly: operands have different variable counts");
    }

    void normalize() {
        for (const auto& t : terms_)
            for (const auto& l : t.word)
                if (l.index < 1 || l.index > num_vars_)
                    throw std::invalid_argument("NCPoly: letter index exceeds variable count");
        std::sort(terms_.begin(), terms_.end(),
                  [](const Term& a, const Term& b) { return word_less(a.word, b.word); });
        std::vector<Term> merged;
        for (auto& t : terms_) {
            if (!merged.empty() && merged.back().word == t.word)
                merged.back().coeff += t.coeff;
            else
                merged.push_back(std::move(t));
        }
        merged.erase(std::remove_if(merged.begin(), merged.end(),
                                    [](const Term& t) { return t.coeff == Complex(0.0, 0.0); }),
                     merged.end());
        terms_ = std::move(merged);
    }

    int num_vars_ = 0;
    std::vector<Term> terms_;
};

/// Formal adjoint: conjugate coefficients, reverse each word, flip stars.
inline NCPoly adjoint(const NCPoly& p) {
    std::vector<NCPoly::Term> ts;
    ts.reserve(p.terms().size());
    for (const auto& t : p.terms()) {
        Word w(t.word.rbegin(), t.word.rend());
        for (auto& l : w) l.starred = !l.starred;
        ts.push_back({std::conj(t.coeff), std::move(w)});
    }
    return NCPoly(p.num_vars(), std::move(ts));
}

/// Evaluate on a matrix model; the empty word contributes coeff * I.
inline CMatrix evaluate(const NCPoly& p, const MatTuple& model) {
    if (static_cast<int>(model.count()) != p.num_vars())
        throw std::invalid_argument("evaluate: model size differs from variable count");
    const Eigen::Index d = model.dim;
    if (d == 0) throw std::invalid_argument("evaluate: empty model");
    CMatrix acc = CMatrix::Zero(d, d);
    for (const auto& t : p.terms()) {
        CMatrix prod = CMatrix::Identity(d, d);
        for (const auto& l : t.word) {
            const CMatrix& m = model[static_cast<std::size_t>(l.index - 1)];
            prod = l.starred ? CMatrix(prod * m.adjoint()) : CMatrix(prod * m);
        }
        acc += t.coeff * prod;
    }
    return acc;
}

namespace detail {

inline std::string format_real(double x) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), x);
    return std::string(buf, res.ptr);
}

/// Coefficient text for a stand-alone (empty word) term, sign not folded.
inline std::string format_complex(Complex c) {
    if (c.imag() == 0.0) return format_real(c.real());
    if (c.real() == 0.0) return format_real(c.imag()) + "i";
    std::string s = "(" + format_real(c.real());
    s += c.imag() < 0.0 ? " - " : " + ";
    s += format_real(std::abs(c.imag())) + "i)";
    return s;
}

class Parser {
  public:
    Parser(std::string_view text, int num_vars) : text_(text), nv_(num_vars) {}

    NCPoly parse() {
        NCPoly p = parse_expr();
        skip_ws();
        if (pos_ != text_.size()) fail("trailing input");
        return p;
    }

  private:
    NCPoly parse_expr() {
        skip_ws();
        bool neg = false;
        if (peek() == '+' || peek() == '-') neg = get() == '-';
        NCPoly acc = parse_term();
        if (neg) acc = acc * Complex(-1.0, 0.0);
        for (;;) {
            skip_ws();
            const char c = peek();
            if (c != '+' && c != '-') break;
            get();
            NCPoly t = parse_term();
            acc = (c == '+') ? acc + t : acc - t;
        }
        return acc;
    }

    NCPoly parse_term() {
        NCPoly acc = parse_factor();
        for (;;) {
            skip_ws();
            if (peek() == '*') {
                get();
                acc = acc * parse_factor();
            } else {
                break;
            }
        }
        return acc;
    }

    NCPoly parse_factor() {
        skip_ws();
        const char c = peek();
        if (c == '(') {
            get();
            NCPoly inner = parse_expr();
            skip_ws();
            if (peek() != ')') fail("expected ')'");
            get();
            return inner;
        }
        if (c == 'X') return parse_var();
        if ((c >= '0' && c <= '9') || c == '.' || c == 'i') return parse_number();
        fail("expected variable, number or '('");
    }

    NCPoly parse_var() {
        get(); // 'X'
        const std::size_t start = pos_;
        long idx = read_uint("variable index");
        if (idx < 1) fail_at("variable index must be >= 1", start);
        if (idx > nv_) fail_at("variable index exceeds variable count", start);
        bool starred = false;
        int ticks = 0;
        while (peek() == '\'') {
            get();
            ++ticks;
        }
        starred = (ticks % 2) == 1; // double adjoint cancels
        return NCPoly::variable(nv_, static_cast<int>(idx), starred);
    }

    /// number := digits ['.' digits] [exponent] ['i']  |  'i'
    NCPoly parse_number() {
        if (peek() == 'i') {
            get();
            return NCPoly::constant(nv_, Complex(0.0, 1.0));
        }
        const std::size_t start = pos_;
        while (is_digit(peek())) get();
        if (peek() == '.') {
            get();
            while (is_digit(peek())) get();
        }
        if (peek() == 'e' || peek() == 'E') {
            get();
            if (peek() == '+' || peek() == '-') get();
            if (!is_digit(peek())) fail("malformed exponent");
            while (is_digit(peek())) get();
        }
        double value = 0.0;
        auto res = std::from_chars(text_.data() + start, text_.data() + pos_, value);
        if (res.ec != std::errc() || res.ptr != text_.data() + pos_)
            fail_at("malformed number", start);
        if (peek() == 'i') {
            get();
            return NCPoly::constant(nv_, Complex(0.0, value));
        }
        return NCPoly::constant(nv_, Complex(value, 0.0));
    }

    long read_uint(const char* what) {
        const std::size_t start = pos_;
        while (is_digit(peek())) get();
        long value = 0;
        auto res = std::from_chars(text_.data() + start, text_.data() + pos_, value);
        if (pos_ == start || res.ec != std::errc())
            fail_at(std::string("expected ") + what, start);
        return value;
    }

    static bool is_digit(char c) { return c >= '0' && c <= '9'; }
    char peek() const { return pos_ < text_.size() ? text_[pos_] : '\0'; }
    char get() { return text_[pos_++]; }
    void skip_ws() {
        while (pos_ < text_.size() && (text_[pos_] == ' ' || text_[pos_] == '\t' ||
                                       text_[pos_] == '\n' || text_[pos_] == '\r'))
            ++pos_;
    }
    [[noreturn]] void fail(const std::string& msg) const { throw ParseError(msg, pos_); }
    [[noreturn]] void fail_at(const std::string& msg, std::size_t off) const {
        throw ParseError(msg, off);
    }

    std::string_view text_;
    std::size_t pos_ = 0;
    long nv_;
};

} // namespace detail

/// Parse the textual polynomial language. Adjoints are postfix apostrophes
/// (X1'), multiplication is '*', coefficients are complex literals
/// ("2", "2.5", "3i", "(1 + 2i)").
inline NCPoly parse(std::string_view text, int num_vars) {
    return detail::Parser(text, num_vars).parse();
}

/// Deterministic canonical printing; parse(format(p)) reproduces p exactly.
inline std::string format(const NCPoly& p) {
    if (p.is_zero()) return "0";
    std::string out;
    bool first = true;
    for (const auto& t : p.terms()) {
        Complex c = t.coeff;
        std::string sign;
        // fold real or imaginary-only signs into the separator
        if (c.imag() == 0.0 && c.real() < 0.0) {
            sign = "-";
            c = -c;
        } else if (c.real() == 0.0 && c.imag() < 0.0) {
            sign = "-";
            c = -c;
        }
        if (first) {
            if (!sign.empty()) out += "-";
            first = false;
        } else {
            out += sign.empty() ? " + " : " - ";
        }
        std::string body;
        if (t.word.empty()) {
            body = detail::format_complex(c);
        } else {
            std::string wordtext;
            for (const auto& l : t.word) {
                if (!wordtext.empty()) wordtext += "*";
                wordtext += "X" + std::to_string(l.index);
                if (l.starred) wordtext += "'";
            }
            if (c == Complex(1.0, 0.0))
                body = wordtext;
            else
                body = detail::format_complex(c) + "*" + wordtext;
        }
        out += body;
    }
    return out;
}

} // namespace mflab
