#include "chrism/registry.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "chrism/errors.hpp"
#include "chrism/reader.hpp"

namespace chrism {

namespace {

constexpr double kSumTolerance = 1e-9;

void validate_distribution(const Term& name, const std::vector<double>& probs) {
    double sum = 0.0;
    for (double p : probs) {
        if (p < 0.0 || p > 1.0)
            throw RuntimeError("switch " + name.to_string() + ": probability " +
                               format_double(p) + " outside [0,1]");
        sum += p;
    }
    if (std::abs(sum - 1.0) > kSumTolerance)
        throw RuntimeError("switch " + name.to_string() +
                           ": probabilities sum to " + format_double(sum) +
                           ", expected 1");
}

std::vector<double> uniform(std::size_t n) {
    return std::vector<double>(n, 1.0 / static_cast<double>(n));
}

}  // namespace

SwitchRegistry SwitchRegistry::from_program(const Program& program) {
    SwitchRegistry registry;
    for (const SwitchDecl& decl : program.declared_switches) registry.declare(decl);
    return registry;
}

void SwitchRegistry::declare(const SwitchDecl& decl) {
    if (!decl.name.ground()) {
        pattern_declarations_.push_back(decl);
        return;
    }
    std::string key = decl.name.to_string();
    auto it = entries_.find(key);
    if (it == entries_.end()) {
        SwitchEntry entry;
        entry.name = decl.name;
        entry.outcomes = decl.outcomes;
        entry.probs = decl.probs ? *decl.probs : uniform(decl.outcomes.size());
        entry.learnable = decl.learnable;
        validate_distribution(decl.name, entry.probs);
        entries_.emplace(std::move(key), std::move(entry));
        return;
    }
    // a later set_sw/values for a known switch updates in place
    SwitchEntry& entry = it->second;
    if (decl.outcomes.size() != entry.outcomes.size())
        throw RuntimeError("switch " + decl.name.to_string() +
                           ": outcome count mismatch");
    if (decl.probs) {
        validate_distribution(decl.name, *decl.probs);
        entry.probs = *decl.probs;
    }
    entry.learnable = entry.learnable && decl.learnable;
}

const SwitchEntry& SwitchRegistry::lookup_or_default(
    const Term& name, const std::vector<Term>& outcomes) {
    if (!name.ground())
        throw RuntimeError("instantiation error: experiment name " +
                           name.to_string() + " is not ground");
    std::string key = name.to_string();
    auto it = entries_.find(key);
    if (it != entries_.end()) {
        SwitchEntry& entry = it->second;
        if (entry.outcomes.size() != outcomes.size())
            throw RuntimeError("switch " + key + " has " +
                               std::to_string(entry.outcomes.size()) +
                               " outcomes, expected " +
                               std::to_string(outcomes.size()));
        if (entry.placeholder_labels) {
            entry.outcomes = outcomes;
            entry.placeholder_labels = false;
        }
        return entry;
    }

    SwitchEntry entry;
    entry.name = name;
    entry.outcomes = outcomes;
    for (const SwitchDecl& decl : pattern_declarations_) {
        Bindings bindings;
        if (match(decl.name, name, bindings)) {
            if (decl.outcomes.size() != outcomes.size())
                throw RuntimeError("switch " + key + " declared with " +
                                   std::to_string(decl.outcomes.size()) +
                                   " outcomes, expected " +
                                   std::to_string(outcomes.size()));
            if (decl.probs) entry.probs = *decl.probs;
            entry.learnable = decl.learnable;
            break;
        }
    }
    if (entry.probs.empty()) entry.probs = uniform(outcomes.size());
    validate_distribution(name, entry.probs);
    return entries_.emplace(std::move(key), std::move(entry)).first->second;
}

void SwitchRegistry::set_switch(const Term& name, const std::vector<double>& probs) {
    if (!name.ground())
        throw RuntimeError("instantiation error: switch name " + name.to_string() +
                           " is not ground");
    validate_distribution(name, probs);
    std::string key = name.to_string();
    auto it = entries_.find(key);
    if (it != entries_.end()) {
        if (it->second.probs.size() != probs.size())
            throw RuntimeError("switch " + key + ": expected " +
                               std::to_string(it->second.probs.size()) +
                               " probabilities, got " +
                               std::to_string(probs.size()));
        it->second.probs = probs;
        return;
    }
    SwitchEntry entry;
    entry.name = name;
    for (std::size_t i = 1; i <= probs.size(); ++i)
        entry.outcomes.push_back(Term::integer(static_cast<std::int64_t>(i)));
    entry.probs = probs;
    entry.placeholder_labels = true;
    entries_.emplace(std::move(key), std::move(entry));
}

const SwitchEntry* SwitchRegistry::find(const Term& name) const {
    auto it = entries_.find(name.to_string());
    return it == entries_.end() ? nullptr : &it->second;
}

SwitchEntry* SwitchRegistry::find(const Term& name) {
    auto it = entries_.find(name.to_string());
    return it == entries_.end() ? nullptr : &it->second;
}

double SwitchRegistry::outcome_probability(const Term& name,
                                           std::size_t outcome_index) const {
    const SwitchEntry* entry = find(name);
    if (!entry || outcome_index >= entry->probs.size())
        throw RuntimeError("unknown switch outcome: " + name.to_string() + "/" +
                           std::to_string(outcome_index));
    return entry->probs[outcome_index];
}

void SwitchRegistry::merge_from(const SwitchRegistry& other) {
    for (const auto& [key, entry] : other.entries_) {
        auto it = entries_.find(key);
        if (it == entries_.end()) {
            entries_[key] = entry;
            continue;
        }
        // the sidecar file carries distributions, not learnability
        bool learnable = it->second.learnable;
        it->second = entry;
        it->second.learnable = learnable;
    }
}

std::vector<const SwitchEntry*> SwitchRegistry::entries() const {
    std::vector<const SwitchEntry*> out;
    out.reserve(entries_.size());
    for (const auto& [key, entry] : entries_) out.push_back(&entry);
    return out;
}

std::string SwitchRegistry::show() const {
    std::string out;
    for (const SwitchEntry* entry : entries()) {
        out += "Switch " + entry->name.to_string() + ":";
        for (std::size_t i = 0; i < entry->outcomes.size(); ++i) {
            char buf[32];
            std::snprintf(buf, sizeof(buf), "%.5f", entry->probs[i]);
            out += " " + entry->outcomes[i].to_string() + " (p: " + buf + ")";
        }
        out += "\n";
    }
    return out;
}

std::string SwitchRegistry::serialize() const {
    std::string out;
    for (const SwitchEntry* entry : entries()) {
        out += entry->name.to_string() + " |";
        for (std::size_t i = 0; i < entry->outcomes.size(); ++i) {
            out += " " + entry->outcomes[i].to_string() + ":" +
                   format_double(entry->probs[i]);
        }
        out += "\n";
    }
    return out;
}

SwitchRegistry SwitchRegistry::deserialize(const std::string& text) {
    SwitchRegistry registry;
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::string trimmed = line;
        auto first = trimmed.find_first_not_of(" \t");
        if (first == std::string::npos || trimmed[first] == '%') continue;

        auto bar = line.find('|');
        if (bar == std::string::npos)
            throw ParseError("registry line missing '|'", line_no, 1);

        SwitchEntry entry;
        {
            TermReader reader(line.substr(0, bar) + " .");
            auto name = reader.next();
            if (!name || !name->ground())
                throw ParseError("bad switch name in registry", line_no, 1);
            entry.name = *name;
        }
        std::istringstream rest(line.substr(bar + 1));
        std::string token;
        while (rest >> token) {
            auto colon = token.rfind(':');
            if (colon == std::string::npos || colon == 0)
                throw ParseError("bad outcome entry '" + token + "' in registry",
                                 line_no, 1);
            TermReader reader(token.substr(0, colon) + " .");
            auto outcome = reader.next();
            if (!outcome)
                throw ParseError("bad outcome in registry", line_no, 1);
            entry.outcomes.push_back(*outcome);
            entry.probs.push_back(std::strtod(token.c_str() + colon + 1, nullptr));
        }
        if (entry.outcomes.empty())
            throw ParseError("empty distribution in registry", line_no, 1);
        validate_distribution(entry.name, entry.probs);
        std::string key = entry.name.to_string();
        registry.entries_.emplace(std::move(key), std::move(entry));
    }
    return registry;
}

}  // namespace chrism
