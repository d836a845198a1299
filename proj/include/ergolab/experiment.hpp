#pragma once

#include <cmath>
#include <fstream>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "ergolab/arith.hpp"
#include "ergolab/hardy.hpp"
#include "ergolab/sequences.hpp"
#include "ergolab/torus_systems.hpp"

namespace ergolab {

// ---------------------------------------------------------------------------
// Key-value experiment configuration.  A config file holds `key = value`
// lines ('#' starts a comment); command-line flags override file values.
// Identical resolved configs replay to byte-identical CSV bodies.
// ---------------------------------------------------------------------------

class ExperimentConfig {
public:
    void load_file(const std::string& path) {
        std::ifstream f(path);
        require(f.good(), ErrorCode::io_error, "cannot open config file: " + path);
        std::string line;
        while (std::getline(f, line)) {
            auto hash = line.find('#');
            if (hash != std::string::npos) line.erase(hash);
            auto eq = line.find('=');
            if (eq == std::string::npos) continue;
            std::string key = trim(line.substr(0, eq));
            std::string value = trim(line.substr(eq + 1));
            if (!key.empty()) values_[key] = value;
        }
    }

    void set(const std::string& key, const std::string& value) { values_[key] = value; }
    bool has(const std::string& key) const { return values_.count(key) > 0; }

    std::string get(const std::string& key, const std::string& fallback = "") const {
        auto it = values_.find(key);
        return it == values_.end() ? fallback : it->second;
    }
    int64_t get_int(const std::string& key, int64_t fallback) const {
        auto it = values_.find(key);
        if (it == values_.end()) return fallback;
        return parse_int(it->second);
    }
    double get_real(const std::string& key, double fallback) const {
        auto it = values_.find(key);
        if (it == values_.end()) return fallback;
        return parse_real(it->second);
    }

    const std::map<std::string, std::string>& entries() const { return values_; }

    static int64_t parse_int(const std::string& s) {
        try {
            size_t pos = 0;
            int64_t v = std::stoll(s, &pos);
            require(pos == s.size(), ErrorCode::validation, "bad integer: " + s);
            return v;
        } catch (const Error&) {
            throw;
        } catch (...) {
            throw Error(ErrorCode::validation, "bad integer: " + s);
        }
    }

    // reals accept the named irrationals used throughout the experiments
    static double parse_real(const std::string& s) {
        if (s == "golden") return (std::sqrt(5.0) - 1.0) / 2.0;
        if (s == "root2m1") return std::sqrt(2.0) - 1.0;
        if (s == "root3m1") return std::sqrt(3.0) - 1.0;
        try {
            size_t pos = 0;
            double v = std::stod(s, &pos);
            require(pos == s.size(), ErrorCode::validation, "bad real: " + s);
            return v;
        } catch (const Error&) {
            throw;
        } catch (...) {
            throw Error(ErrorCode::validation, "bad real: " + s);
        }
    }

    static std::string trim(const std::string& s) {
        size_t b = s.find_first_not_of(" \t\r\n");
        if (b == std::string::npos) return "";
        size_t e = s.find_last_not_of(" \t\r\n");
        return s.substr(b, e - b + 1);
    }

private:
    std::map<std::string, std::string> values_;
};

inline std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == sep) {
            out.push_back(ExperimentConfig::trim(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(ExperimentConfig::trim(cur));
    return out;
}

inline std::vector<int64_t> parse_int_list(const std::string& s) {
    std::vector<int64_t> out;
    for (auto& tok : split(s, ','))
        if (!tok.empty()) out.push_back(ExperimentConfig::parse_int(tok));
    return out;
}

inline std::vector<double> parse_real_list(const std::string& s) {
    std::vector<double> out;
    for (auto& tok : split(s, ','))
        if (!tok.empty()) out.push_back(ExperimentConfig::parse_real(tok));
    return out;
}

// ---------------------------------------------------------------------------
// Spec mini-language parsers
// ---------------------------------------------------------------------------

// "name" or "name:k=v,k=v"; returns name and the argument map
struct SpecToken {
    std::string name;
    std::map<std::string, std::string> args;

    std::string arg(const std::string& key, const std::string& fallback = "") const {
        auto it = args.find(key);
        return it == args.end() ? fallback : it->second;
    }
};

inline SpecToken parse_spec_token(const std::string& s) {
    SpecToken t;
    auto colon = s.find(':');
    t.name = ExperimentConfig::trim(colon == std::string::npos ? s : s.substr(0, colon));
    if (colon != std::string::npos) {
        // segments without '=' continue the previous value, so list-valued
        // arguments like alphas=a,b,c keep their commas
        std::string* last = nullptr;
        for (auto& kv : split(s.substr(colon + 1), ',')) {
            if (kv.empty()) continue;
            auto eq = kv.find('=');
            if (eq == std::string::npos) {
                require(last != nullptr, ErrorCode::validation,
                        "spec argument needs key=value: " + kv);
                *last += "," + kv;
                continue;
            }
            last = &t.args[ExperimentConfig::trim(kv.substr(0, eq))];
            *last = ExperimentConfig::trim(kv.substr(eq + 1));
        }
    }
    return t;
}

// single-variable integer polynomial like "3n^2 - n + 7"
struct IntPolynomial {
    std::vector<std::pair<int64_t, int>> terms;  // coefficient, exponent

    int degree() const {
        int d = 0;
        for (auto& [c, e] : terms) d = std::max(d, e);
        return d;
    }
};

inline IntPolynomial parse_polynomial(const std::string& input) {
    std::string s;
    for (char c : input)
        if (!isspace((unsigned char)c)) s += c;
    require(!s.empty(), ErrorCode::validation, "empty polynomial");
    IntPolynomial poly;
    size_t i = 0;
    while (i < s.size()) {
        int sign = 1;
        while (i < s.size() && (s[i] == '+' || s[i] == '-')) {
            if (s[i] == '-') sign = -sign;
            ++i;
        }
        require(i < s.size(), ErrorCode::validation, "dangling sign in polynomial: " + input);
        int64_t coeff = 1;
        bool saw_digits = false;
        size_t start = i;
        while (i < s.size() && isdigit((unsigned char)s[i])) ++i;
        if (i > start) {
            coeff = ExperimentConfig::parse_int(s.substr(start, i - start));
            saw_digits = true;
        }
        if (i < s.size() && s[i] == '*') ++i;
        int exp = 0;
        if (i < s.size() && s[i] == 'n') {
            ++i;
            exp = 1;
            if (i < s.size() && s[i] == '^') {
                ++i;
                size_t es = i;
                while (i < s.size() && isdigit((unsigned char)s[i])) ++i;
                require(i > es, ErrorCode::validation, "bad exponent in polynomial: " + input);
                exp = (int)ExperimentConfig::parse_int(s.substr(es, i - es));
            }
        } else {
            require(saw_digits, ErrorCode::validation, "bad term in polynomial: " + input);
        }
        poly.terms.push_back({sign * coeff, exp});
    }
    return poly;
}

// iterate assignment "T1:n,T2:n^2" onto `num_maps` commuting maps
inline PolynomialMapping parse_iterate(const std::string& s, int num_maps) {
    PolynomialMapping p(1, num_maps);
    for (auto& part : split(s, ',')) {
        if (part.empty()) continue;
        require(part.size() >= 3 && (part[0] == 'T' || part[0] == 't'), ErrorCode::validation,
                "iterate must look like T1:poly, got: " + part);
        auto colon = part.find(':');
        require(colon != std::string::npos, ErrorCode::validation,
                "iterate must look like T1:poly, got: " + part);
        int64_t idx = ExperimentConfig::parse_int(part.substr(1, colon - 1));
        require(idx >= 1 && idx <= num_maps, ErrorCode::validation,
                "iterate map index out of range: " + part);
        auto poly = parse_polynomial(part.substr(colon + 1));
        for (auto& [c, e] : poly.terms) p.add_term((int)idx - 1, c, {e});
    }
    return p;
}

// observable: "const[:c=1]" or "char:k=1,0" (frequency vector on T^m)
inline TrigPoly parse_observable(const std::string& s, int dim) {
    auto tok = parse_spec_token(s);
    if (tok.name == "const") {
        double c = tok.args.count("c") ? ExperimentConfig::parse_real(tok.arg("c")) : 1.0;
        return TrigPoly::constant(dim, c);
    }
    if (tok.name == "char") {
        auto freq = parse_int_list(tok.arg("k"));
        require((int)freq.size() == dim, ErrorCode::validation,
                "character frequency arity mismatch in: " + s);
        return TrigPoly::character(freq);
    }
    throw Error(ErrorCode::validation, "unknown observable spec: " + s);
}

// system: "rotation:alpha=golden" | "rotations:alphas=golden,root2m1"
//       | "skew:alpha=golden,beta=0"
inline CommutingTorusSystem parse_system(const std::string& s, int64_t grid_q) {
    auto tok = parse_spec_token(s);
    if (tok.name == "rotation")
        return CommutingTorusSystem::rotation1(ExperimentConfig::parse_real(tok.arg("alpha")),
                                               grid_q);
    if (tok.name == "rotations")
        return CommutingTorusSystem::rotations(parse_real_list(tok.arg("alphas")), grid_q);
    if (tok.name == "skew")
        return CommutingTorusSystem::skew(ExperimentConfig::parse_real(tok.arg("alpha", "0")),
                                          ExperimentConfig::parse_real(tok.arg("beta", "0")),
                                          grid_q);
    throw Error(ErrorCode::validation, "unknown system spec: " + s);
}

// hardy function: terms like "t^1.5", "2*t^0.5*log^2", "log^2", joined by +/-
inline HardyFunction parse_hardy(const std::string& input, double t0 = 1.5) {
    std::string s;
    for (char c : input)
        if (!isspace((unsigned char)c)) s += c;
    require(!s.empty(), ErrorCode::validation, "empty hardy spec");
    std::vector<HardyTerm> terms;
    size_t i = 0;
    while (i < s.size()) {
        double sign = 1.0;
        while (i < s.size() && (s[i] == '+' || s[i] == '-')) {
            if (s[i] == '-') sign = -sign;
            ++i;
        }
        size_t start = i;
        while (i < s.size() && (isdigit((unsigned char)s[i]) || s[i] == '.')) ++i;
        double coeff = (i > start) ? ExperimentConfig::parse_real(s.substr(start, i - start)) : 1.0;
        if (i < s.size() && s[i] == '*') ++i;
        double power = 0.0;
        if (i < s.size() && s[i] == 't') {
            ++i;
            power = 1.0;
            if (i < s.size() && s[i] == '^') {
                ++i;
                size_t es = i;
                while (i < s.size() && (isdigit((unsigned char)s[i]) || s[i] == '.')) ++i;
                require(i > es, ErrorCode::validation, "bad exponent in hardy spec: " + input);
                power = ExperimentConfig::parse_real(s.substr(es, i - es));
            }
            if (i < s.size() && s[i] == '*') ++i;
        }
        int log_power = 0;
        if (i + 2 < s.size() && s.compare(i, 3, "log") == 0) {
            i += 3;
            log_power = 1;
            if (i < s.size() && s[i] == '^') {
                ++i;
                size_t es = i;
                while (i < s.size() && isdigit((unsigned char)s[i])) ++i;
                require(i > es, ErrorCode::validation, "bad log exponent in hardy spec: " + input);
                log_power = (int)ExperimentConfig::parse_int(s.substr(es, i - es));
            }
        }
        require(power != 0.0 || log_power != 0 || i > start, ErrorCode::validation,
                "bad term in hardy spec: " + input);
        terms.push_back({sign * coeff, power, log_power});
    }
    return HardyFunction(std::move(terms), t0);
}

// multiplicative function: one | liouville | fb:b=2[,mult=1] | nit:t=0.7
//                        | legendre:q=7 | principal:q=6
inline MultiplicativeFunctionSpec parse_multiplicative(const std::string& s) {
    auto tok = parse_spec_token(s);
    if (tok.name == "one") return mult_one();
    if (tok.name == "liouville") return mult_liouville();
    if (tok.name == "fb")
        return mult_fb((int)ExperimentConfig::parse_int(tok.arg("b", "2")),
                       tok.arg("mult", "0") == "1");
    if (tok.name == "nit") return mult_nit(ExperimentConfig::parse_real(tok.arg("t", "0")));
    if (tok.name == "legendre")
        return legendre_character(ExperimentConfig::parse_int(tok.arg("q"))).as_multiplicative();
    if (tok.name == "principal")
        return principal_character(ExperimentConfig::parse_int(tok.arg("q"))).as_multiplicative();
    throw Error(ErrorCode::validation, "unknown multiplicative spec: " + s);
}

// weight sequence on N^1: const | alt | char:alpha=.. | quad:alpha=..
//   | hardy:f=t^1.5 | random:seed=7 | mult:spec=liouville,sieve_max=2000000
inline ComplexSeqNd parse_weight(const std::string& s,
                                 std::shared_ptr<FactorSieve> sieve = nullptr) {
    auto tok = parse_spec_token(s);
    if (tok.name == "const") {
        double c = tok.args.count("c") ? ExperimentConfig::parse_real(tok.arg("c")) : 1.0;
        return seq_constant(1, c);
    }
    if (tok.name == "alt")
        return make_seq1([](int64_t n) { return cplx((n % 2) ? -1.0 : 1.0, 0.0); }, 1.0, "alt");
    if (tok.name == "char") {
        double alpha = ExperimentConfig::parse_real(tok.arg("alpha"));
        return make_seq1(
            [alpha](int64_t n) { return e_l((long double)n * (long double)alpha); }, 1.0,
            "char");
    }
    if (tok.name == "quad") {
        double alpha = ExperimentConfig::parse_real(tok.arg("alpha"));
        return make_seq1(
            [alpha](int64_t n) {
                return e_l((long double)n * (long double)n * (long double)alpha);
            },
            1.0, "quad");
    }
    if (tok.name == "hardy") {
        auto f = std::make_shared<HardyFunction>(parse_hardy(tok.arg("f")));
        return make_seq1(
            [f](int64_t n) {
                return n >= (int64_t)std::ceil(f->domain_cutoff()) ? hardy_weight(*f, n)
                                                                   : cplx(0.0, 0.0);
            },
            1.0, "hardy");
    }
    if (tok.name == "random") {
        uint64_t seed = (uint64_t)ExperimentConfig::parse_int(tok.arg("seed", "1"));
        return make_seq1(
            [seed](int64_t n) {
                Rng r(seed ^ (uint64_t)(n * 2654435761LL));
                return r.unit();
            },
            1.0, "random");
    }
    if (tok.name == "mult") {
        require(sieve != nullptr, ErrorCode::validation,
                "multiplicative weight needs a sieve");
        auto phi = std::make_shared<MultiplicativeFunctionSpec>(
            parse_multiplicative(tok.arg("spec", "liouville")));
        return make_seq1([phi, sieve](int64_t n) { return phi->eval(n, *sieve); }, 1.0,
                         "mult:" + phi->label);
    }
    throw Error(ErrorCode::validation, "unknown weight spec: " + s);
}

}  // namespace ergolab
