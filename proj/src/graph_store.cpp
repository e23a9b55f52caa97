#include "kgwe/graph_store.hpp"

#include <cctype>
#include <ostream>

#include "kgwe/error.hpp"
#include "kgwe/io.hpp"

namespace kgwe {

std::uint32_t Interner::intern(std::string_view name) {
    if (auto it = ids_.find(name); it != ids_.end()) return it->second;
    const auto id = static_cast<std::uint32_t>(names_.size());
    names_.emplace_back(name);
    ids_.emplace(names_.back(), id);
    return id;
}

std::optional<std::uint32_t> Interner::find(std::string_view name) const {
    if (auto it = ids_.find(name); it != ids_.end()) return it->second;
    return std::nullopt;
}

std::span<const Edge> KnowledgeGraph::out_edges(EntityId v) const {
    if (v >= entity_count())
        throw ContractViolation("entity id " + std::to_string(v) + " out of range");
    return std::span<const Edge>(edges_).subspan(offsets_[v], offsets_[v + 1] - offsets_[v]);
}

std::size_t KnowledgeGraph::edge_offset(EntityId v) const {
    if (v > entity_count())
        throw ContractViolation("entity id " + std::to_string(v) + " out of range");
    return offsets_[v];
}

const std::string& KnowledgeGraph::iri(EntityId v) const {
    if (v >= entity_count())
        throw ContractViolation("entity id " + std::to_string(v) + " out of range");
    return entities_.name(v);
}

const std::string& KnowledgeGraph::predicate_iri(PredicateId p) const {
    if (p >= predicate_count())
        throw ContractViolation("predicate id " + std::to_string(p) + " out of range");
    return predicates_.name(p);
}

std::size_t GraphBuilder::TripleHash::operator()(
    const std::array<std::uint32_t, 3>& t) const noexcept {
    std::uint64_t h = t[0];
    h = h * 0x9e3779b97f4a7c15ULL ^ t[1];
    h = h * 0x9e3779b97f4a7c15ULL ^ t[2];
    return static_cast<std::size_t>(h ^ (h >> 29));
}

bool GraphBuilder::add(std::string_view subject, std::string_view predicate,
                       std::string_view object) {
    const EntityId s = graph_.entities_.intern(subject);
    const PredicateId p = graph_.predicates_.intern(predicate);
    const EntityId o = graph_.entities_.intern(object);
    if (!seen_.insert({s, p, o}).second) {
        ++duplicates_;
        return false;
    }
    if (adjacency_.size() < graph_.entities_.size()) adjacency_.resize(graph_.entities_.size());
    adjacency_[s].push_back(Edge{p, o});
    return true;
}

KnowledgeGraph GraphBuilder::build() && {
    adjacency_.resize(graph_.entities_.size());
    std::size_t total = 0;
    for (const auto& list : adjacency_) total += list.size();

    graph_.offsets_.assign(1, 0);
    graph_.offsets_.reserve(adjacency_.size() + 1);
    graph_.edges_.clear();
    graph_.edges_.reserve(total);
    for (auto& list : adjacency_) {
        graph_.edges_.insert(graph_.edges_.end(), list.begin(), list.end());
        graph_.offsets_.push_back(graph_.edges_.size());
        std::vector<Edge>().swap(list);
    }
    seen_.clear();
    return std::move(graph_);
}

namespace {

enum class TermKind { iri, blank, literal };

struct Term {
    TermKind kind;
    std::string_view text;  // IRI without brackets, or `_:label`
};

class LineParser {
public:
    explicit LineParser(std::string_view line) : line_(line) {}

    bool at_end() {
        skip_ws();
        return pos_ >= line_.size() || line_[pos_] == '#';
    }

    // Returns an error message, empty on success.
    std::string term(Term& out, bool allow_blank, bool allow_literal) {
        skip_ws();
        if (pos_ >= line_.size()) return "unexpected end of line";
        const char c = line_[pos_];
        if (c == '<') {
            const auto close = line_.find('>', pos_ + 1);
            if (close == std::string_view::npos) return "unterminated IRI";
            const auto body = line_.substr(pos_ + 1, close - pos_ - 1);
            if (body.find_first_of(" \t<\"") != std::string_view::npos)
                return "invalid character in IRI";
            out = {TermKind::iri, body};
            pos_ = close + 1;
            return {};
        }
        if (c == '_' && pos_ + 1 < line_.size() && line_[pos_ + 1] == ':') {
            if (!allow_blank) return "blank node not allowed here";
            auto end = line_.find_first_of(" \t", pos_);
            if (end == std::string_view::npos) end = line_.size();
            // `_:b.` at end of line: the dot is the statement terminator.
            if (end == line_.size() && line_[end - 1] == '.' && end - pos_ > 3) --end;
            if (end - pos_ <= 2) return "empty blank node label";
            out = {TermKind::blank, line_.substr(pos_, end - pos_)};
            pos_ = end;
            return {};
        }
        if (c == '"') {
            if (!allow_literal) return "literal not allowed here";
            std::size_t i = pos_ + 1;
            for (; i < line_.size() && line_[i] != '"'; ++i)
                if (line_[i] == '\\') ++i;
            if (i >= line_.size()) return "unterminated literal";
            ++i;
            if (i < line_.size() && line_[i] == '@') {
                ++i;
                const auto start = i;
                while (i < line_.size() && (std::isalnum(static_cast<unsigned char>(line_[i])) ||
                                            line_[i] == '-'))
                    ++i;
                if (i == start) return "empty language tag";
            } else if (line_.substr(i, 3) == "^^<") {
                const auto close = line_.find('>', i + 3);
                if (close == std::string_view::npos) return "unterminated datatype IRI";
                i = close + 1;
            }
            out = {TermKind::literal, line_.substr(pos_, i - pos_)};
            pos_ = i;
            return {};
        }
        return std::string("unexpected character '") + c + "'";
    }

    std::string terminator() {
        skip_ws();
        if (pos_ >= line_.size() || line_[pos_] != '.') return "missing '.' terminator";
        ++pos_;
        if (!at_end()) return "trailing content after '.'";
        return {};
    }

private:
    void skip_ws() {
        while (pos_ < line_.size() && (line_[pos_] == ' ' || line_[pos_] == '\t')) ++pos_;
    }

    std::string_view line_;
    std::size_t pos_ = 0;
};

}  // namespace

ParsedGraph parse_ntriples(std::istream& in, const ParseOptions& options) {
    GraphBuilder builder;
    ParseReport report;
    std::string raw;

    auto fail = [&](std::size_t line, std::string message) {
        if (options.strict) throw FormatError(line, message);
        report.issues.push_back({line, std::move(message)});
    };

    while (std::getline(in, raw)) {
        const auto line_no = ++report.lines;
        const auto line = chomp(raw);
        LineParser parser(line);
        if (parser.at_end()) continue;

        Term subject{}, predicate{}, object{};
        if (auto err = parser.term(subject, true, false); !err.empty()) {
            fail(line_no, "subject: " + err);
            continue;
        }
        if (auto err = parser.term(predicate, false, false); !err.empty()) {
            fail(line_no, "predicate: " + err);
            continue;
        }
        if (auto err = parser.term(object, true, true); !err.empty()) {
            fail(line_no, "object: " + err);
            continue;
        }
        if (auto err = parser.terminator(); !err.empty()) {
            fail(line_no, err);
            continue;
        }
        if (object.kind == TermKind::literal) {
            ++report.literal_triples;
            continue;
        }
        if (builder.add(subject.text, predicate.text, object.text)) ++report.triples;
    }
    report.duplicate_triples = builder.duplicates();
    return {std::move(builder).build(), std::move(report)};
}

ParsedGraph load_ntriples(const std::filesystem::path& path, const ParseOptions& options) {
    InputFile file(path);
    return parse_ntriples(file.stream(), options);
}

void write_parse_report(const ParseReport& report, std::ostream& out) {
    for (const auto& issue : report.issues) out << issue.line << '\t' << issue.message << '\n';
}

}  // namespace kgwe
