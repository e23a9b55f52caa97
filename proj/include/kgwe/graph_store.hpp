#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <istream>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace kgwe {

using EntityId = std::uint32_t;
using PredicateId = std::uint32_t;

struct Edge {
    PredicateId predicate;
    EntityId target;

    friend bool operator==(const Edge&, const Edge&) = default;
};

// Bidirectional IRI <-> dense id table. Ids are assigned in first-seen order.
class Interner {
public:
    std::uint32_t intern(std::string_view name);
    std::optional<std::uint32_t> find(std::string_view name) const;
    const std::string& name(std::uint32_t id) const { return names_.at(id); }
    std::size_t size() const noexcept { return names_.size(); }

private:
    struct Hash {
        using is_transparent = void;
        std::size_t operator()(std::string_view s) const noexcept {
            return std::hash<std::string_view>{}(s);
        }
    };
    std::vector<std::string> names_;
    std::unordered_map<std::string, std::uint32_t, Hash, std::equal_to<>> ids_;
};

// Immutable RDF graph in CSR form. Adjacency of vertex v occupies the global
// edge range [edge_offset(v), edge_offset(v + 1)); weight tables and samplers
// index edges by that global position.
class KnowledgeGraph {
public:
    KnowledgeGraph() : offsets_{0} {}

    std::size_t entity_count() const noexcept { return entities_.size(); }
    std::size_t predicate_count() const noexcept { return predicates_.size(); }
    std::size_t edge_count() const noexcept { return edges_.size(); }

    // Throws ContractViolation for an id outside [0, entity_count()).
    std::span<const Edge> out_edges(EntityId v) const;
    std::size_t edge_offset(EntityId v) const;
    std::span<const std::size_t> offsets() const noexcept { return offsets_; }
    std::span<const Edge> edges() const noexcept { return edges_; }

    std::optional<EntityId> resolve(std::string_view iri) const { return entities_.find(iri); }
    std::optional<PredicateId> resolve_predicate(std::string_view iri) const {
        return predicates_.find(iri);
    }
    const std::string& iri(EntityId v) const;
    const std::string& predicate_iri(PredicateId p) const;

private:
    friend class GraphBuilder;

    Interner entities_;
    Interner predicates_;
    std::vector<std::size_t> offsets_;
    std::vector<Edge> edges_;
};

// Accumulates triples and freezes them into a KnowledgeGraph. Identical
// triples are kept once; per-subject insertion order is preserved.
class GraphBuilder {
public:
    // Returns false when the triple was a duplicate.
    bool add(std::string_view subject, std::string_view predicate, std::string_view object);
    std::size_t duplicates() const noexcept { return duplicates_; }
    KnowledgeGraph build() &&;

private:
    struct TripleHash {
        std::size_t operator()(const std::array<std::uint32_t, 3>& t) const noexcept;
    };

    KnowledgeGraph graph_;
    std::vector<std::vector<Edge>> adjacency_;
    std::unordered_set<std::array<std::uint32_t, 3>, TripleHash> seen_;
    std::size_t duplicates_ = 0;
};

struct ParseIssue {
    std::size_t line;
    std::string message;
};

struct ParseReport {
    std::size_t lines = 0;
    std::size_t triples = 0;           // IRI-object triples kept as edges
    std::size_t literal_triples = 0;   // skipped, objects are literals
    std::size_t duplicate_triples = 0;
    std::vector<ParseIssue> issues;
};

struct ParseOptions {
    // Abort with FormatError on the first malformed line.
    bool strict = false;
};

struct ParsedGraph {
    KnowledgeGraph graph;
    ParseReport report;
};

ParsedGraph parse_ntriples(std::istream& in, const ParseOptions& options = {});
ParsedGraph load_ntriples(const std::filesystem::path& path, const ParseOptions& options = {});

// One `LINE<tab>MESSAGE` row per issue.
void write_parse_report(const ParseReport& report, std::ostream& out);

}  // namespace kgwe
