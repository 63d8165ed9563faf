#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <functional>
#include <numeric>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "mflab/rng.hpp"

namespace mflab {

// ---------------------------------------------------------------------------
// Free group words, stored as reduced runs (generator, signed exponent).
// ---------------------------------------------------------------------------

/// Reduced word in a free group, run-length encoded. Adjacent runs always
/// carry distinct generators and nonzero exponents, so cancellation at a
/// concatenation seam is amortized O(1) per letter.
class FWord {
  public:
    struct Run {
        int gen;           ///< 1-based generator index
        long long exp;     ///< nonzero signed exponent

        friend bool operator==(const Run& a, const Run& b) {
            return a.gen == b.gen && a.exp == b.exp;
        }
    };

    FWord() = default;

    static FWord generator(int g, long long e = 1) {
        if (g < 1) throw std::invalid_argument("FWord: generator index must be >= 1");
        FWord w;
        if (e != 0) w.runs_.push_back({g, e});
        return w;
    }

    /// Free reduction of a raw letter list ((generator, +/-1 or any exponent)).
    static FWord reduce(const std::vector<std::pair<int, long long>>& letters) {
        FWord w;
        for (const auto& [g, e] : letters) w.push_run(g, e);
        return w;
    }

    bool is_identity() const { return runs_.empty(); }
    const std::vector<Run>& runs() const { return runs_; }

    /// Letter count of the reduced word.
    std::size_t length() const {
        std::size_t n = 0;
        for (const auto& r : runs_) n += static_cast<std::size_t>(std::llabs(r.exp));
        return n;
    }

    int max_generator() const {
        int m = 0;
        for (const auto& r : runs_) m = std::max(m, r.gen);
        return m;
    }

    FWord inverse() const {
        FWord w;
        w.runs_.reserve(runs_.size());
        for (auto it = runs_.rbegin(); it != runs_.rend(); ++it) w.runs_.push_back({it->gen, -it->exp});
        return w;
    }

    friend FWord operator*(const FWord& a, const FWord& b) {
        FWord w = a;
        for (const auto& r : b.runs_) w.push_run(r.gen, r.exp);
        return w;
    }

    FWord pow(long long n) const {
        FWord acc, base = n < 0 ? inverse() : *this;
        for (long long i = 0, k = std::llabs(n); i < k; ++i) acc = acc * base;
        return acc;
    }

    /// Relabel generators: g_i -> g_{image(i)} (image is 1-based).
    FWord relabel(const std::function<int(int)>& image) const {
        FWord w;
        for (const auto& r : runs_) w.push_run(image(r.gen), r.exp);
        return w;
    }

    /// Expanded letters, one (generator, +/-1) per position.
    std::vector<std::pair<int, int>> letters() const {
        std::vector<std::pair<int, int>> out;
        out.reserve(length());
        for (const auto& r : runs_) {
            const int s = r.exp > 0 ? 1 : -1;
            for (long long i = 0, k = std::llabs(r.exp); i < k; ++i) out.emplace_back(r.gen, s);
        }
        return out;
    }

    /// Sum of signed exponents of one generator (the abelianized coordinate).
    long long exponent_sum(int g) const {
        long long s = 0;
        for (const auto& r : runs_)
            if (r.gen == g) s += r.exp;
        return s;
    }

    friend bool operator==(const FWord& a, const FWord& b) { return a.runs_ == b.runs_; }

    std::string str() const {
        if (runs_.empty()) return "e";
        std::string s;
        for (const auto& r : runs_) {
            if (!s.empty()) s += "*";
            s += "g" + std::to_string(r.gen);
            if (r.exp != 1) s += "^" + std::to_string(r.exp);
        }
        return s;
    }

  private:
    void push_run(int g, long long e) {
        if (g < 1) throw std::invalid_argument("FWord: generator index must be >= 1");
        if (e == 0) return;
        if (!runs_.empty() && runs_.back().gen == g) {
            runs_.back().exp += e;
            if (runs_.back().exp == 0) runs_.pop_back();
            return;
        }
        runs_.push_back({g, e});
    }

    std::vector<Run> runs_;
};

// ---------------------------------------------------------------------------
// Permutations (S_n)
// ---------------------------------------------------------------------------

class Perm {
  public:
    Perm() = default;
    explicit Perm(int n) : img_(static_cast<std::size_t>(n)) {
        std::iota(img_.begin(), img_.end(), 0);
    }
    /// images in one-based convention: image_of_i = images[i-1]
    static Perm from_one_based(const std::vector<int>& images) {
        Perm p;
        p.img_.resize(images.size());
        std::vector<bool> seen(images.size(), false);
        for (std::size_t i = 0; i < images.size(); ++i) {
            const int v = images[i] - 1;
            if (v < 0 || v >= static_cast<int>(images.size()) || seen[static_cast<std::size_t>(v)])
                throw std::invalid_argument("Perm: images are not a bijection");
            seen[static_cast<std::size_t>(v)] = true;
            p.img_[i] = v;
        }
        return p;
    }

    int size() const { return static_cast<int>(img_.size()); }
    /// one-based application
    int operator()(int i) const { return img_.at(static_cast<std::size_t>(i - 1)) + 1; }

    bool is_identity() const {
        for (std::size_t i = 0; i < img_.size(); ++i)
            if (img_[i] != static_cast<int>(i)) return false;
        return true;
    }

    /// (a*b)(i) = a(b(i))
    friend Perm operator*(const Perm& a, const Perm& b) {
        if (a.size() != b.size()) throw std::invalid_argument("Perm: size mismatch");
        Perm c(a.size());
        for (int i = 1; i <= a.size(); ++i) c.img_[static_cast<std::size_t>(i - 1)] = a(b(i)) - 1;
        return c;
    }

    Perm inverse() const {
        Perm c(size());
        for (int i = 1; i <= size(); ++i) c.img_[static_cast<std::size_t>((*this)(i)-1)] = i - 1;
        return c;
    }

    friend bool operator==(const Perm& a, const Perm& b) { return a.img_ == b.img_; }

    std::string str() const {
        std::string s = "[";
        for (int i = 1; i <= size(); ++i) {
            if (i > 1) s += " ";
            s += std::to_string((*this)(i));
        }
        return s + "]";
    }

    static std::vector<Perm> all(int n) {
        std::vector<int> base(static_cast<std::size_t>(n));
        std::iota(base.begin(), base.end(), 1);
        std::vector<Perm> out;
        do {
            out.push_back(from_one_based(base));
        } while (std::next_permutation(base.begin(), base.end()));
        return out;
    }

    static Perm random(int n, Rng& rng) {
        std::vector<int> base(static_cast<std::size_t>(n));
        std::iota(base.begin(), base.end(), 1);
        for (std::size_t i = base.size(); i > 1; --i)
            std::swap(base[i - 1], base[rng.below(i)]);
        return from_one_based(base);
    }

  private:
    std::vector<int> img_;
};

// ---------------------------------------------------------------------------
// Semidirect product F_n x| S_n, with sigma acting by generator relabeling.
// ---------------------------------------------------------------------------

struct SemidirectElem {
    FWord word;
    Perm perm;

    friend bool operator==(const SemidirectElem& a, const SemidirectElem& b) {
        return a.word == b.word && a.perm == b.perm;
    }
    std::string str() const { return "(" + word.str() + ", " + perm.str() + ")"; }
};

/// (w1, s1)(w2, s2) = (w1 * alpha(s1)(w2), s1 s2) with alpha(s)(g_i) = g_{s(i)}.
inline SemidirectElem semidirect_mul(const SemidirectElem& a, const SemidirectElem& b) {
    if (a.perm.size() != b.perm.size())
        throw std::invalid_argument("semidirect_mul: size mismatch");
    const Perm& s = a.perm;
    FWord tw = b.word.relabel([&](int g) {
        if (g > s.size()) throw std::invalid_argument("semidirect_mul: word uses generator beyond n");
        return s(g);
    });
    return {a.word * tw, a.perm * b.perm};
}

inline SemidirectElem semidirect_inv(const SemidirectElem& a) {
    const Perm si = a.perm.inverse();
    FWord wi = a.word.inverse().relabel([&](int g) { return si(g); });
    return {wi, si};
}

// ---------------------------------------------------------------------------
// Freeness witness for the element g = (g_1 ... g_n)^power and permutations
// acting by relabeling.
// ---------------------------------------------------------------------------

struct WitnessReport {
    bool nonidentity = false;
    bool suffix_matches = false;
    std::size_t word_length = 0;
    std::string suffix; ///< the last n letters, printed
};

/// Reduced form of g^{n_1} (beta_1 g beta_1^{-1})^{n_2} ... in F_n, where the
/// conjugates act by generator relabeling. Reports nonidentity and whether the
/// word ends in g_{beta(1)}..g_{beta(n)} (or the inverse pattern), beta being
/// the last permutation.
inline WitnessReport freeness_witness(int n, const std::vector<long long>& exponents,
                                      const std::vector<Perm>& perms, int g_power = 3) {
    if (n < 1) throw std::invalid_argument("freeness_witness: n must be >= 1");
    if (exponents.empty()) throw std::invalid_argument("freeness_witness: empty exponent list");
    if (perms.size() + 1 != exponents.size())
        throw std::invalid_argument("freeness_witness: need one permutation between consecutive powers");
    for (long long e : exponents)
        if (e == 0) throw std::invalid_argument("freeness_witness: zero exponent");
    for (std::size_t j = 0; j < perms.size(); ++j) {
        if (perms[j].size() != n) throw std::invalid_argument("freeness_witness: malformed permutation");
        if (perms[j].is_identity())
            throw std::invalid_argument("freeness_witness: identity permutation not allowed");
        if (j > 0 && perms[j] == perms[j - 1])
            throw std::invalid_argument("freeness_witness: adjacent permutations must differ");
    }

    FWord g;
    for (int rep = 0; rep < g_power; ++rep)
        for (int i = 1; i <= n; ++i) g = g * FWord::generator(i);

    FWord w = g.pow(exponents[0]);
    for (std::size_t j = 0; j < perms.size(); ++j) {
        const Perm& beta = perms[j];
        FWord cg = g.relabel([&](int i) { return beta(i); });
        w = w * cg.pow(exponents[j + 1]);
    }

    WitnessReport rep;
    rep.nonidentity = !w.is_identity();
    rep.word_length = w.length();

    const Perm last = perms.empty() ? Perm(n) : perms.back();
    const auto letters = w.letters();
    rep.suffix_matches = letters.size() >= static_cast<std::size_t>(n);
    if (rep.suffix_matches) {
        const bool positive = exponents.back() > 0;
        for (int k = 0; k < n; ++k) {
            const auto& [gen, sign] = letters[letters.size() - static_cast<std::size_t>(n - k)];
            // positive tail: g_{b(1)}..g_{b(n)}; negative: g_{b(n)}^-1..g_{b(1)}^-1
            const int want_gen = positive ? last(k + 1) : last(n - k);
            const int want_sign = positive ? 1 : -1;
            if (gen != want_gen || sign != want_sign) {
                rep.suffix_matches = false;
                break;
            }
        }
        std::string s;
        for (std::size_t k = letters.size() - static_cast<std::size_t>(n); k < letters.size(); ++k) {
            if (!s.empty()) s += "*";
            s += "g" + std::to_string(letters[k].first) + (letters[k].second < 0 ? "^-1" : "");
        }
        rep.suffix = s;
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Group handles: normal forms for the built-in families and free products.
// ---------------------------------------------------------------------------

struct ZElem {
    long long n = 0;
    friend bool operator==(const ZElem& a, const ZElem& b) { return a.n == b.n; }
};
struct ZpElem {
    long long r = 0;
    friend bool operator==(const ZpElem& a, const ZpElem& b) { return a.r == b.r; }
};

using BaseElem = std::variant<ZElem, ZpElem, Perm, FWord, SemidirectElem>;

struct Syllable {
    int factor = 0; ///< index into the free product's factor list
    BaseElem elem;
};

/// Alternating-syllable normal form in a free product (adjacent syllables come
/// from distinct factors; no identity syllables).
struct FPElem {
    std::vector<Syllable> syllables;
};

struct GroupElem {
    std::variant<ZElem, ZpElem, Perm, FWord, SemidirectElem, FPElem> value;

    GroupElem() : value(ZElem{0}) {}
    template <typename T>
    GroupElem(T v) : value(std::move(v)) {}
};

class GroupHandle {
  public:
    enum class Family { Z, Zp, S, F, FSemiS, FreeProduct };

    static GroupHandle integers() { return GroupHandle(Family::Z, 0, 0); }
    static GroupHandle cyclic(long long p) {
        if (p < 1) throw std::invalid_argument("GroupHandle: cyclic order must be >= 1");
        return GroupHandle(Family::Zp, p, 0);
    }
    static GroupHandle symmetric(int n) {
        if (n < 1) throw std::invalid_argument("GroupHandle: symmetric degree must be >= 1");
        return GroupHandle(Family::S, 0, n);
    }
    static GroupHandle free(int n) { return GroupHandle(Family::F, 0, n); }
    static GroupHandle free_semidirect_symmetric(int n) { return GroupHandle(Family::FSemiS, 0, n); }
    static GroupHandle free_product(std::vector<GroupHandle> factors) {
        if (factors.size() < 2)
            throw std::invalid_argument("GroupHandle: free product needs at least two factors");
        for (const auto& f : factors)
            if (f.family() == Family::FreeProduct)
                throw std::invalid_argument("GroupHandle: nested free products are not supported; flatten the factor list");
        GroupHandle h(Family::FreeProduct, 0, 0);
        h.factors_ = std::move(factors);
        return h;
    }

    Family family() const { return family_; }
    long long order_p() const { return p_; }
    int degree() const { return n_; }
    const std::vector<GroupHandle>& factors() const { return factors_; }

    GroupElem identity() const {
        switch (family_) {
            case Family::Z: return GroupElem(ZElem{0});
            case Family::Zp: return GroupElem(ZpElem{0});
            case Family::S: return GroupElem(Perm(n_));
            case Family::F: return GroupElem(FWord());
            case Family::FSemiS: return GroupElem(SemidirectElem{FWord(), Perm(n_)});
            case Family::FreeProduct: return GroupElem(FPElem{});
        }
        throw std::logic_error("GroupHandle: bad family");
    }

    bool is_identity(const GroupElem& e) const {
        const GroupElem nf = normal_form(e);
        switch (family_) {
            case Family::Z: return std::get<ZElem>(nf.value).n == 0;
            case Family::Zp: return std::get<ZpElem>(nf.value).r == 0;
            case Family::S: return std::get<Perm>(nf.value).is_identity();
            case Family::F: return std::get<FWord>(nf.value).is_identity();
            case Family::FSemiS: {
                const auto& s = std::get<SemidirectElem>(nf.value);
                return s.word.is_identity() && s.perm.is_identity();
            }
            case Family::FreeProduct: return std::get<FPElem>(nf.value).syllables.empty();
        }
        throw std::logic_error("GroupHandle: bad family");
    }

    /// Idempotent normal form.
    GroupElem normal_form(const GroupElem& e) const {
        switch (family_) {
            case Family::Z:
            case Family::S:
            case Family::F:
            case Family::FSemiS:
                return check(e);
            case Family::Zp: {
                auto z = std::get<ZpElem>(check(e).value);
                z.r = ((z.r % p_) + p_) % p_;
                return GroupElem(z);
            }
            case Family::FreeProduct: {
                const auto& fp = std::get<FPElem>(check(e).value);
                return GroupElem(normalize_fp(fp));
            }
        }
        throw std::logic_error("GroupHandle: bad family");
    }

    GroupElem mul(const GroupElem& a, const GroupElem& b) const {
        switch (family_) {
            case Family::Z:
                return GroupElem(ZElem{std::get<ZElem>(check(a).value).n + std::get<ZElem>(check(b).value).n});
            case Family::Zp: {
                const long long r =
                    std::get<ZpElem>(check(a).value).r + std::get<ZpElem>(check(b).value).r;
                return normal_form(GroupElem(ZpElem{r}));
            }
            case Family::S:
                return GroupElem(std::get<Perm>(check(a).value) * std::get<Perm>(check(b).value));
            case Family::F:
                return GroupElem(std::get<FWord>(check(a).value) * std::get<FWord>(check(b).value));
            case Family::FSemiS:
                return GroupElem(semidirect_mul(std::get<SemidirectElem>(check(a).value),
                                                std::get<SemidirectElem>(check(b).value)));
            case Family::FreeProduct: {
                FPElem out = std::get<FPElem>(check(a).value);
                const auto& fb = std::get<FPElem>(check(b).value);
                out.syllables.insert(out.syllables.end(), fb.syllables.begin(), fb.syllables.end());
                return GroupElem(normalize_fp(out));
            }
        }
        throw std::logic_error("GroupHandle: bad family");
    }

    GroupElem inv(const GroupElem& a) const {
        switch (family_) {
            case Family::Z: return GroupElem(ZElem{-std::get<ZElem>(check(a).value).n});
            case Family::Zp: return normal_form(GroupElem(ZpElem{-std::get<ZpElem>(check(a).value).r}));
            case Family::S: return GroupElem(std::get<Perm>(check(a).value).inverse());
            case Family::F: return GroupElem(std::get<FWord>(check(a).value).inverse());
            case Family::FSemiS: return GroupElem(semidirect_inv(std::get<SemidirectElem>(check(a).value)));
            case Family::FreeProduct: {
                const auto& fp = std::get<FPElem>(check(a).value);
                FPElem out;
                for (auto it = fp.syllables.rbegin(); it != fp.syllables.rend(); ++it)
                    out.syllables.push_back({it->factor, factor_inv(it->factor, it->elem)});
                return GroupElem(normalize_fp(out));
            }
        }
        throw std::logic_error("GroupHandle: bad family");
    }

    bool equal(const GroupElem& a, const GroupElem& b) const {
        return is_identity(mul(inv(a), b));
    }

    /// Enumerate all elements (finite families only: Z_p and S_n).
    std::vector<GroupElem> elements() const {
        switch (family_) {
            case Family::Zp: {
                std::vector<GroupElem> out;
                for (long long r = 0; r < p_; ++r) out.push_back(GroupElem(ZpElem{r}));
                return out;
            }
            case Family::S: {
                std::vector<GroupElem> out;
                for (auto& p : Perm::all(n_)) out.push_back(GroupElem(std::move(p)));
                return out;
            }
            default:
                throw std::invalid_argument("GroupHandle: elements() needs a finite family");
        }
    }

    /// Bounded random element, for fuzzing.
    GroupElem random(Rng& rng, int size_hint = 6) const {
        switch (family_) {
            case Family::Z:
                return GroupElem(ZElem{static_cast<long long>(rng.below(2 * 1000 + 1)) - 1000});
            case Family::Zp: return GroupElem(ZpElem{static_cast<long long>(rng.below(static_cast<std::uint64_t>(p_)))});
            case Family::S: return GroupElem(Perm::random(n_, rng));
            case Family::F: return GroupElem(random_word(rng, n_, size_hint));
            case Family::FSemiS:
                return GroupElem(SemidirectElem{random_word(rng, n_, size_hint), Perm::random(n_, rng)});
            case Family::FreeProduct: {
                FPElem fp;
                const std::size_t k = rng.below(static_cast<std::uint64_t>(size_hint)) + 1;
                for (std::size_t i = 0; i < k; ++i) {
                    const int f = static_cast<int>(rng.below(factors_.size()));
                    fp.syllables.push_back({f, to_base(factors_[f].random(rng, 2))});
                }
                return GroupElem(normalize_fp(fp));
            }
        }
        throw std::logic_error("GroupHandle: bad family");
    }

    std::string str(const GroupElem& e) const {
        switch (family_) {
            case Family::Z: return "t^" + std::to_string(std::get<ZElem>(e.value).n);
            case Family::Zp: return "c^" + std::to_string(std::get<ZpElem>(e.value).r);
            case Family::S: return std::get<Perm>(e.value).str();
            case Family::F: return std::get<FWord>(e.value).str();
            case Family::FSemiS: return std::get<SemidirectElem>(e.value).str();
            case Family::FreeProduct: {
                const auto& fp = std::get<FPElem>(e.value);
                if (fp.syllables.empty()) return "e";
                std::string s;
                for (const auto& syl : fp.syllables) {
                    if (!s.empty()) s += " . ";
                    s += "[" + std::to_string(syl.factor) + ":" +
                         factors_[static_cast<std::size_t>(syl.factor)].str(from_base(syl.elem)) + "]";
                }
                return s;
            }
        }
        throw std::logic_error("GroupHandle: bad family");
    }

  private:
    GroupHandle(Family f, long long p, int n) : family_(f), p_(p), n_(n) {}

    const GroupElem& check(const GroupElem& e) const {
        const bool ok = [&] {
            switch (family_) {
                case Family::Z: return std::holds_alternative<ZElem>(e.value);
                case Family::Zp: return std::holds_alternative<ZpElem>(e.value);
                case Family::S: return std::holds_alternative<Perm>(e.value);
                case Family::F: return std::holds_alternative<FWord>(e.value);
                case Family::FSemiS: return std::holds_alternative<SemidirectElem>(e.value);
                case Family::FreeProduct: return std::holds_alternative<FPElem>(e.value);
            }
            return false;
        }();
        if (!ok) throw std::invalid_argument("GroupHandle: element does not belong to this family");
        return e;
    }

    static GroupElem from_base(const BaseElem& b) {
        return std::visit([](const auto& v) { return GroupElem(v); }, b);
    }
    static BaseElem to_base(const GroupElem& g) {
        return std::visit(
            [](const auto& v) -> BaseElem {
                using T = std::decay_t<decltype(v)>;
                if constexpr (std::is_same_v<T, FPElem>)
                    throw std::invalid_argument("GroupHandle: free product cannot be a factor element");
                else
                    return BaseElem(v);
            },
            g.value);
    }

    BaseElem factor_mul(int f, const BaseElem& a, const BaseElem& b) const {
        const auto& h = factors_.at(static_cast<std::size_t>(f));
        return to_base(h.mul(from_base(a), from_base(b)));
    }
    BaseElem factor_inv(int f, const BaseElem& a) const {
        const auto& h = factors_.at(static_cast<std::size_t>(f));
        return to_base(h.inv(from_base(a)));
    }
    bool factor_is_identity(int f, const BaseElem& a) const {
        const auto& h = factors_.at(static_cast<std::size_t>(f));
        return h.is_identity(from_base(a));
    }
    BaseElem factor_nf(int f, const BaseElem& a) const {
        const auto& h = factors_.at(static_cast<std::size_t>(f));
        return to_base(h.normal_form(from_base(a)));
    }

    /// Stack normalization: local identities deleted, same-factor neighbors
    /// merged, repeated until alternating.
    FPElem normalize_fp(const FPElem& in) const {
        FPElem out;
        for (const auto& syl : in.syllables) {
            if (syl.factor < 0 || syl.factor >= static_cast<int>(factors_.size()))
                throw std::invalid_argument("free product: unknown factor index");
            BaseElem e = factor_nf(syl.factor, syl.elem);
            if (factor_is_identity(syl.factor, e)) continue;
            while (!out.syllables.empty() && out.syllables.back().factor == syl.factor) {
                e = factor_mul(syl.factor, out.syllables.back().elem, e);
                out.syllables.pop_back();
                if (factor_is_identity(syl.factor, e)) break;
            }
            if (!factor_is_identity(syl.factor, e)) out.syllables.push_back({syl.factor, factor_nf(syl.factor, e)});
        }
        return out;
    }

    static FWord random_word(Rng& rng, int gens, int size_hint) {
        std::vector<std::pair<int, long long>> ls;
        const std::size_t len = rng.below(static_cast<std::uint64_t>(2 * size_hint)) + 1;
        for (std::size_t i = 0; i < len; ++i) {
            const int g = static_cast<int>(rng.below(static_cast<std::uint64_t>(std::max(1, gens)))) + 1;
            ls.emplace_back(g, rng.below(2) == 0 ? 1 : -1);
        }
        return FWord::reduce(ls);
    }

    Family family_;
    long long p_;
    int n_;
    std::vector<GroupHandle> factors_;
};

/// Alternating normal form of a syllable list in the free product of the given
/// handles. Identity test is emptiness of the result.
inline FPElem free_product_nf(const std::vector<GroupHandle>& handles,
                              const std::vector<Syllable>& syllables) {
    GroupHandle h = GroupHandle::free_product(handles);
    return std::get<FPElem>(h.normal_form(GroupElem(FPElem{syllables})).value);
}

// ---------------------------------------------------------------------------
// Coset systems and the decomposition g g_i H = g_{sigma(i)} H.
// ---------------------------------------------------------------------------

struct CosetSystem {
    GroupHandle group;
    std::function<bool(const GroupElem&)> in_subgroup;
    std::vector<GroupElem> reps; ///< reps[0] is the identity
    std::string name;
};

struct CosetDecomposition {
    std::vector<int> sigma;       ///< 0-based: g reps[i] H = reps[sigma[i]] H
    std::vector<GroupElem> h;     ///< h[i] = reps[sigma[i]]^{-1} g reps[i], in H
};

/// Decompose g against the coset system: find the permutation sigma and the
/// subgroup elements h_i with g = reps[sigma(i)] h_i reps[i]^{-1} for all i.
inline CosetDecomposition coset_decompose(const CosetSystem& sys, const GroupElem& g) {
    const std::size_t r = sys.reps.size();
    CosetDecomposition out;
    out.sigma.assign(r, -1);
    out.h.resize(r);
    std::vector<bool> hit(r, false);
    for (std::size_t i = 0; i < r; ++i) {
        const GroupElem x = sys.group.mul(g, sys.reps[i]);
        int found = -1;
        for (std::size_t j = 0; j < r; ++j) {
            const GroupElem cand = sys.group.mul(sys.group.inv(sys.reps[j]), x);
            if (sys.in_subgroup(cand)) {
                if (found >= 0)
                    throw std::runtime_error("coset_decompose: element lies in two cosets; inconsistent membership predicate");
                found = static_cast<int>(j);
                out.h[i] = sys.group.normal_form(cand);
            }
        }
        if (found < 0)
            throw std::runtime_error("coset_decompose: element lies in no coset; inconsistent membership predicate");
        if (hit[static_cast<std::size_t>(found)])
            throw std::runtime_error("coset_decompose: sigma is not injective; inconsistent coset system");
        hit[static_cast<std::size_t>(found)] = true;
        out.sigma[i] = found;
        // reconstruction identity g = reps[sigma(i)] h_i reps[i]^{-1}
        const GroupElem back = sys.group.mul(sys.group.mul(sys.reps[static_cast<std::size_t>(found)], out.h[i]),
                                             sys.group.inv(sys.reps[i]));
        if (!sys.group.equal(back, g))
            throw std::runtime_error("coset_decompose: reconstruction identity failed");
    }
    return out;
}

/// Z with subgroup 2Z, representatives {e, t}.
inline CosetSystem coset_system_z_mod_2z() {
    CosetSystem sys{GroupHandle::integers(),
                    [](const GroupElem& e) { return std::get<ZElem>(e.value).n % 2 == 0; },
                    {},
                    "z-2z"};
    sys.reps.push_back(GroupElem(ZElem{0}));
    sys.reps.push_back(GroupElem(ZElem{1}));
    return sys;
}

/// F_n x| S_n with subgroup F_n (trivial permutation part); one representative
/// per permutation, identity first.
inline CosetSystem coset_system_semidirect_over_free(int n) {
    CosetSystem sys{GroupHandle::free_semidirect_symmetric(n),
                    [](const GroupElem& e) {
                        return std::get<SemidirectElem>(e.value).perm.is_identity();
                    },
                    {},
                    "f" + std::to_string(n) + "-s" + std::to_string(n)};
    for (const auto& p : Perm::all(n)) sys.reps.push_back(GroupElem(SemidirectElem{FWord(), p}));
    // identity representative must come first; Perm::all starts at the identity
    return sys;
}

} // namespace mflab
