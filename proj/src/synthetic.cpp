#include <algorithm>
#include <cstdio>
#include <istream>
#include <map>
#include <ostream>
#include <set>

#include "idsim/error.hpp"
#include "idsim/ingest.hpp"
#include "idsim/random.hpp"
#include "text_util.hpp"

namespace idsim {

void GeneratorConfig::validate() const {
    if (classes.empty()) throw ConfigError("generator config declares no classes");
    if (samples_per_class == 0) throw ConfigError("generator config has zero samples per class");
    if (min_length == 0 || min_length > max_length) {
        throw ConfigError("generator trace length range must satisfy 1 <= min_length <= max_length");
    }
    std::set<std::string> seen;
    for (const auto& c : classes) {
        if (c.label.empty() || c.label == "-") throw ConfigError("invalid class label '" + c.label + "'");
        if (!seen.insert(c.label).second) throw ConfigError("duplicate class '" + c.label + "'");
        bool any_positive = false;
        for (const auto& [token, rate] : c.rates) {
            if (!(rate >= 0.0 && rate <= 1.0)) {
                throw ConfigError("rate for '" + token + "' in class '" + c.label + "' is outside [0,1]");
            }
            any_positive = any_positive || rate > 0.0;
        }
        if (!any_positive) throw ConfigError("class '" + c.label + "' has no token with a positive rate");
    }
}

std::vector<SyscallTrace> generate_synthetic(const GeneratorConfig& config, std::uint64_t seed) {
    config.validate();
    Rng rng(seed);
    std::vector<SyscallTrace> out;
    out.reserve(config.classes.size() * config.samples_per_class);
    const std::size_t span = config.max_length - config.min_length + 1;

    for (const auto& profile : config.classes) {
        const auto top = std::max_element(profile.rates.begin(), profile.rates.end(),
                                          [](const auto& a, const auto& b) { return a.second < b.second; });
        for (std::size_t s = 0; s < config.samples_per_class; ++s) {
            const std::size_t length = config.min_length + rng.below(span);
            std::vector<std::string> calls;
            // Every token is an independent Bernoulli draw at each of `length` positions.
            for (const auto& [token, rate] : profile.rates) {
                for (std::size_t p = 0; p < length; ++p) {
                    if (rng.bernoulli(rate)) calls.push_back(token);
                }
            }
            if (calls.empty()) calls.push_back(top->first);
            rng.shuffle(calls);

            char id[32];
            std::snprintf(id, sizeof id, "-%04zu", s + 1);
            out.push_back({profile.label + id, profile.label, std::move(calls)});
        }
    }
    return out;
}

GeneratorConfig parse_generator_config(std::istream& in) {
    GeneratorConfig cfg;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto t = detail::trim(line);
        if (t.empty() || t.front() == '#') continue;
        const auto eq = t.find('=');
        if (eq == std::string_view::npos) throw ParseError(line_no, "expected 'key = value'");
        const std::string key{detail::trim(t.substr(0, eq))};
        const auto value = detail::trim(t.substr(eq + 1));
        auto as_count = [&](std::string_view v) {
            auto d = detail::parse_double(v);
            if (!d || *d < 0 || *d != static_cast<double>(static_cast<std::size_t>(*d))) {
                throw ParseError(line_no, "'" + key + "' must be a non-negative integer");
            }
            return static_cast<std::size_t>(*d);
        };
        if (key == "samples_per_class") {
            cfg.samples_per_class = as_count(value);
        } else if (key == "min_length") {
            cfg.min_length = as_count(value);
        } else if (key == "max_length") {
            cfg.max_length = as_count(value);
        } else if (key.rfind("class.", 0) == 0) {
            ClassProfile profile;
            profile.label = key.substr(6);
            for (const auto& item : detail::split_ws(value)) {
                const auto colon = item.rfind(':');
                auto rate = colon == std::string::npos ? std::nullopt
                                                       : detail::parse_double(std::string_view(item).substr(colon + 1));
                if (!rate || colon == 0) throw ParseError(line_no, "expected 'token:rate', got '" + item + "'");
                profile.rates[item.substr(0, colon)] = *rate;
            }
            cfg.classes.push_back(std::move(profile));
        } else {
            throw ParseError(line_no, "unknown generator key '" + key + "'");
        }
    }
    return cfg;
}

void write_generator_config(std::ostream& out, const GeneratorConfig& config) {
    out << "samples_per_class = " << config.samples_per_class << '\n'
        << "min_length = " << config.min_length << '\n'
        << "max_length = " << config.max_length << '\n';
    for (const auto& c : config.classes) {
        out << "class." << c.label << " =";
        for (const auto& [token, rate] : c.rates) out << ' ' << token << ':' << detail::format_double(rate);
        out << '\n';
    }
}

GeneratorConfig generator_preset(std::string_view name) {
    GeneratorConfig cfg;
    if (name == "two-class") {
        cfg.samples_per_class = 50;
        cfg.min_length = 30;
        cfg.max_length = 40;
        cfg.classes = {
            {"normal", {{"close", 0.2}, {"fstat", 0.1}, {"mmap", 0.1}, {"open", 0.25}, {"read", 0.35}, {"write", 0.3}}},
            {"attack", {{"close", 0.05}, {"execve", 0.3}, {"open", 0.05}, {"ptrace", 0.35}, {"setuid", 0.25}, {"socket", 0.2}}},
        };
    } else if (name == "five-class") {
        // Signature calls appear at every position, so each class is a fixed
        // count profile; background calls add per-trace noise. The four attack
        // classes overlap in graded amounts and normal shares nothing.
        cfg.samples_per_class = 40;
        cfg.min_length = 30;
        cfg.max_length = 30;
        const std::map<std::string, double> background{{"brk", 0.1}, {"getpid", 0.1}, {"poll", 0.1}, {"time", 0.1}};
        auto profile = [&](std::string label, std::initializer_list<const char*> signature) {
            ClassProfile p{std::move(label), background};
            for (const char* token : signature) p.rates[token] = 1.0;
            return p;
        };
        cfg.classes = {
            profile("normal", {"close", "mmap", "open", "read", "stat", "write"}),
            profile("dos", {"accept", "clone", "fork", "recvfrom", "sendto", "socket"}),
            profile("probe", {"accept", "bind", "clone", "connect", "fork", "getpeername", "getsockopt", "listen",
                              "recvfrom", "sendto", "setsockopt", "socket"}),
            profile("r2l", {"accept", "bind", "clone", "connect", "fork", "getpeername", "getsockopt", "listen",
                            "recvfrom", "setsockopt"}),
            profile("u2r", {"bind", "connect", "getpeername", "getsockopt", "listen", "sendto", "setsockopt", "socket"}),
        };
    } else {
        throw ConfigError("unknown generator preset '" + std::string(name) + "'");
    }
    return cfg;
}

} // namespace idsim
