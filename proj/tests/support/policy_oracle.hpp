// Brute-force classification oracle: a plain linear scan over the rule
// vectors, independent of any lookup structure the engine builds. Used by
// unit tests and the acceptance suite to cross-check the engine.

#pragma once

#include "pth/policy.hpp"
#include "pth/util.hpp"

namespace pth::testing {

inline PolicyCategory oracle_cipher(const PolicyRuleSet& rules, const std::string& name,
                                    TlsVersion version) {
    for (const auto& r : rules.cipher_rules)
        if (iequals(r.cipher_suite, name) && r.tls == version) return r.category;
    return PolicyCategory::NotListed;
}

inline PolicyCategory oracle_key(const PolicyRuleSet& rules, const std::string& algorithm,
                                 int bits) {
    for (const auto& r : rules.key_rules)
        if (iequals(r.key, algorithm) && bits >= r.min_length && bits <= r.max_length)
            return r.category;
    return PolicyCategory::NotListed;
}

inline PolicyCategory oracle_curve(const PolicyRuleSet& rules, const std::string& name) {
    for (const auto& r : rules.curve_rules)
        if (iequals(r.elliptic_curve, trim(name))) return r.category;
    return PolicyCategory::NotListed;
}

inline PolicyCategory oracle_protocol(const PolicyRuleSet& rules, TlsVersion version) {
    bool any = false, recommended = false;
    for (const auto& r : rules.cipher_rules) {
        if (r.tls != version) continue;
        any = true;
        if (r.category == PolicyCategory::Recommended) recommended = true;
    }
    if (!any) return PolicyCategory::NotListed;
    return recommended ? PolicyCategory::Recommended : PolicyCategory::Legacy;
}

} // namespace pth::testing
