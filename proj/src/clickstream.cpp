#include <charconv>
#include <istream>

#include "kgwe/error.hpp"
#include "kgwe/io.hpp"
#include "kgwe/weighting.hpp"

namespace kgwe {

namespace {

std::string pair_key(std::string_view source, std::string_view target) {
    std::string key;
    key.reserve(source.size() + target.size() + 1);
    key.append(source).push_back('\t');
    key.append(target);
    return key;
}

int hex_value(char c) {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
}

std::string percent_decode(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] == '%' && i + 2 < s.size()) {
            const int hi = hex_value(s[i + 1]), lo = hex_value(s[i + 2]);
            if (hi >= 0 && lo >= 0) {
                out.push_back(static_cast<char>(hi * 16 + lo));
                i += 2;
                continue;
            }
        }
        out.push_back(s[i]);
    }
    return out;
}

}  // namespace

void ClickstreamTable::add(std::string_view source, std::string_view target, std::uint64_t count) {
    if (count == 0) throw ContractViolation("clickstream counts must be positive");
    counts_[pair_key(source, target)] += count;
}

std::optional<std::uint64_t> ClickstreamTable::count(std::string_view source,
                                                     std::string_view target) const {
    if (auto it = counts_.find(pair_key(source, target)); it != counts_.end()) return it->second;
    return std::nullopt;
}

ParsedClickstream parse_clickstream(std::istream& in) {
    ParsedClickstream result;
    auto& report = result.report;
    std::string raw;
    std::size_t line_no = 0;
    std::string_view fields[4];

    while (std::getline(in, raw)) {
        ++line_no;
        const auto line = chomp(raw);
        if (line.empty()) continue;
        ++report.rows;

        std::size_t n = 0;
        split_fields(line, '\t', [&](std::string_view f) {
            if (n < 4) fields[n] = f;
            ++n;
        });
        if (n != 4) {
            report.malformed.push_back({line_no, "expected 4 tab-separated columns"});
            continue;
        }
        if (fields[0].empty() || fields[1].empty()) {
            report.malformed.push_back({line_no, "empty page title"});
            continue;
        }
        std::uint64_t count = 0;
        const auto [ptr, ec] =
            std::from_chars(fields[3].data(), fields[3].data() + fields[3].size(), count);
        if (ec != std::errc{} || ptr != fields[3].data() + fields[3].size() || count == 0) {
            report.malformed.push_back({line_no, "count must be a positive integer"});
            continue;
        }
        if (fields[2] != "link") {
            ++report.skipped_non_link;
            continue;
        }
        result.table.add(fields[0], fields[1], count);
    }
    return result;
}

ParsedClickstream load_clickstream(const std::filesystem::path& path) {
    InputFile file(path);
    return parse_clickstream(file.stream());
}

std::optional<std::string> page_title(std::string_view iri, const ClickstreamOptions& options) {
    if (!iri.starts_with(options.entity_prefix) || iri.size() == options.entity_prefix.size())
        return std::nullopt;
    const auto title = iri.substr(options.entity_prefix.size());
    return options.url_decode ? percent_decode(title) : std::string(title);
}

EdgeWeightTable clickstream_weights(const KnowledgeGraph& graph, const ClickstreamTable& table,
                                    const ClickstreamOptions& options,
                                    ClickstreamCoverage* coverage) {
    if (!(options.smoothing >= 0.0)) throw ContractViolation("smoothing must be >= 0");

    std::vector<std::optional<std::string>> titles(graph.entity_count());
    ClickstreamCoverage stats;
    for (EntityId v = 0; v < graph.entity_count(); ++v) {
        titles[v] = page_title(graph.iri(v), options);
        if (!titles[v]) ++stats.untitled_entities;
    }

    std::vector<double> weights;
    weights.reserve(graph.edge_count());
    for (EntityId v = 0; v < graph.entity_count(); ++v) {
        for (const Edge& e : graph.out_edges(v)) {
            std::optional<std::uint64_t> count;
            if (titles[v] && titles[e.target]) count = table.count(*titles[v], *titles[e.target]);
            if (count) {
                weights.push_back(static_cast<double>(*count));
                ++stats.edges_observed;
            } else {
                weights.push_back(options.smoothing);
                ++stats.edges_smoothed;
            }
        }
    }
    if (coverage != nullptr) *coverage = stats;
    return {graph, std::move(weights), WeightStrategy::clickstream};
}

}  // namespace kgwe
