#pragma once

#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "modcheck/diag.hpp"
#include "modcheck/source_loc.hpp"

// Interface Specification (.is) contract language: lexer, parser, validator,
// order closure and canonical renderer. The concrete grammar is documented in
// docs/contract-grammar.md.

namespace modcheck::isc {

struct ContractError : std::runtime_error {
    SourceLoc loc;
    ContractError(SourceLoc l, const std::string& msg)
        : std::runtime_error(to_string(l) + ": " + msg), loc(std::move(l)) {}
};

// A normalized C type-and-declarator text: tokens joined by single spaces,
// comments stripped. Normalization is idempotent.
std::string normalize_type_text(std::string_view raw);

struct FunSignature {
    std::string name;
    std::string return_type;          // normalized
    std::vector<std::string> params;  // normalized types, names stripped; empty == (void)

    bool operator==(const FunSignature&) const = default;
};

// Stored in normalized `<` orientation: before must come first.
struct OrderConstraint {
    std::string before;
    std::string after;

    bool operator==(const OrderConstraint&) const = default;
    auto operator<=>(const OrderConstraint&) const = default;
};

struct ExternalGroup {
    std::string group_id;          // bare identifier or a `name.h` token
    bool header_bound = false;     // group_id ends in ".h"
    std::vector<FunSignature> decls;

    bool operator==(const ExternalGroup&) const = default;
};

struct ISContract {
    std::string module_name;
    std::vector<FunSignature> entry_points;
    std::vector<OrderConstraint> entry_order;
    std::vector<ExternalGroup> external_groups;
    std::vector<OrderConstraint> external_order;

    // Which section keyword spelling the source used (canonical names are
    // entry_points / entry_order / external_calls / external_call_order).
    std::string entry_keyword;
    std::string entry_order_keyword;
    std::string external_calls_keyword;
    std::string external_order_keyword;

    bool structurally_equal(const ISContract& o) const {
        return module_name == o.module_name && entry_points == o.entry_points &&
               entry_order == o.entry_order && external_groups == o.external_groups &&
               external_order == o.external_order;
    }

    const FunSignature* find_entry(const std::string& name) const;
    const FunSignature* find_external(const std::string& name) const;
    // Group id of the external declaration, or nullopt if not declared.
    std::optional<std::string> external_group_of(const std::string& name) const;
};

// Throws ContractError on malformed input (with line/column), duplicate
// sections, or unknown section keywords.
ISContract parse_contract(std::string_view text, const std::string& filename = "<contract>");

// Well-formedness per the ISContract invariants; violations are returned,
// never thrown.
std::vector<Diagnostic> validate_contract(const ISContract& c);

// Transitive closure of a constraint set, or the vertex set of a cycle.
struct OrderClosure {
    std::set<std::pair<std::string, std::string>> pairs;  // (before, after)
    std::vector<std::string> cycle;                       // non-empty iff cyclic

    bool has_cycle() const { return !cycle.empty(); }
    bool ordered(const std::string& before, const std::string& after) const {
        return pairs.count({before, after}) != 0;
    }
};

OrderClosure order_closure(const std::vector<OrderConstraint>& constraints);

// Canonical text; render(parse(t)) reparses to a structurally equal contract.
std::string render(const ISContract& c);

std::string signature_text(const FunSignature& s);

} // namespace modcheck::isc
