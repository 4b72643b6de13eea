#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <string>

#include "foldkit/errors.hpp"

namespace foldkit {

using Int = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

/// Parses "p/q" or "p" (optionally signed) into an exact rational.
inline Rational parse_rational(const std::string& text) {
    auto slash = text.find('/');
    try {
        if (slash == std::string::npos) {
            // Allow decimal literals: "2.5" -> 5/2 exactly.
            auto dot = text.find('.');
            if (dot == std::string::npos) return Rational(Int(text));
            std::string head = text.substr(0, dot);
            std::string frac = text.substr(dot + 1);
            if (frac.empty()) throw InputError("bad rational literal '" + text + "'");
            bool neg = !head.empty() && head[0] == '-';
            Int scale = 1;
            for (std::size_t i = 0; i < frac.size(); ++i) scale *= 10;
            Int whole = head.empty() || head == "-" || head == "+" ? Int(0) : Int(head);
            Int num = whole * scale + (neg ? -Int(frac) : Int(frac));
            return Rational(num, scale);
        }
        Int p(text.substr(0, slash));
        Int q(text.substr(slash + 1));
        if (q == 0) throw InputError("rational with zero denominator: '" + text + "'");
        return Rational(p, q);
    } catch (const std::runtime_error&) {
        throw InputError("bad rational literal '" + text + "'");
    }
}

inline std::string rational_to_string(const Rational& r) {
    std::string s = boost::multiprecision::numerator(r).str();
    if (boost::multiprecision::denominator(r) != 1)
        s += "/" + boost::multiprecision::denominator(r).str();
    return s;
}

}  // namespace foldkit
