#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "apidm/error.hpp"
#include "apidm/rng.hpp"
#include "apidm/text.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace apidm;

namespace {

ApiDataset from_text(const std::string& text) { return parse_dataset(nlohmann::ordered_json::parse(text)); }

ApiComponent make(std::string id, std::string summary, std::vector<std::pair<std::string, std::string>> props = {}) {
    ApiComponent c;
    c.id = std::move(id);
    c.summary = std::move(summary);
    c.properties = std::move(props);
    return c;
}

void check_against_oracle(const ApiDataset& d, const std::vector<SearchCriteria>& searches) {
    std::vector<ApiComponent> components(d.components().begin(), d.components().end());
    const auto ix = oracle::build(components);
    for (std::size_t c = 0; c < d.size(); ++c) {
        const auto& v = d.search_vector(c);
        double nnz_oracle = 0;
        for (const auto& [term, w] : ix.vectors[c]) {
            nnz_oracle += 1;
            const auto t = d.term_index(term);
            REQUIRE(t.has_value());
            CHECK(std::abs(v.at(*t) - w) < 1e-9);
        }
        CHECK(static_cast<double>(v.nnz()) == nnz_oracle);
    }
    for (std::size_t t = 0; t < d.vocabulary().size(); ++t) {
        CHECK(std::abs(d.idf()[t] - ix.idf.at(d.vocabulary()[t])) < 1e-12);
    }
    for (const auto& criteria : searches) {
        const auto results = score_and_rank(d, criteria, 99);
        const auto expected = oracle::scores(ix, components, criteria);
        for (std::size_t c = 0; c < d.size(); ++c) CHECK(std::abs(results.scores()[c] - expected[c]) < 1e-9);
        for (std::size_t i = 1; i < results.size(); ++i) {
            CHECK(results.scores()[results.ranking()[i - 1]] >= results.scores()[results.ranking()[i]]);
        }
        const auto got = recommend_keywords(d, results, criteria, 6);
        const auto want = oracle::keywords(ix, results.ranking(), criteria, 6);
        REQUIRE(got.size() == want.size());
        oracle::Dense mean;
        const std::size_t pool = std::min<std::size_t>(20, d.size());
        for (std::size_t i = 0; i < pool; ++i) {
            for (const auto& [t, w] : ix.vectors[results.ranking()[i]]) mean[t] += w / static_cast<double>(pool);
        }
        for (std::size_t i = 0; i < got.size(); ++i) CHECK(std::abs(mean[got[i]] - mean[want[i]]) < 1e-9);
    }
}

}  // namespace

TEST_CASE("tokenize splits identifiers, camelCase and punctuation") {
    CHECK(tokenize("ssh_write_knownhost") == std::vector<std::string>{"ssh", "write", "knownhost"});
    CHECK(tokenize("openSSLContext") == std::vector<std::string>{"open", "ssl", "context"});
    CHECK(tokenize("").empty());
    CHECK(tokenize("  ,;  ").empty());
    CHECK(tokenize("const char *name") == std::vector<std::string>{"const", "char", "name"});
    CHECK(tokenize("SSH_OK on success") == std::vector<std::string>{"ssh", "ok", "on", "success"});
    CHECK(tokenize("uint32_t") == std::vector<std::string>{"uint32", "t"});
}

TEST_CASE("edit distance") {
    CHECK(edit_distance("ssh_connect", "ssh_connect") == 0);
    CHECK(edit_distance("ssh_conect", "ssh_connect") == 1);
    CHECK(edit_distance("", "abc") == 3);
    CHECK(edit_distance("kitten", "sitting") == 3);
}

TEST_CASE("smallest corpus loads with two vocabulary terms") {
    const auto d = from_text(R"({"api":"x","components":[{"id":"f","summary":"open socket"}]})");
    CHECK(d.size() == 1);
    CHECK(d.vocabulary() == std::vector<std::string>{"open", "socket"});
    CHECK(d.search_vector(0).norm() == doctest::Approx(1.0));
}

TEST_CASE("corpus validation errors") {
    CHECK_THROWS_AS(from_text(R"({"api":"x","components":[{"id":"f","summary":"a"},{"id":"f","summary":"b"}]})"),
                    CorpusError);
    CHECK_THROWS_AS(from_text(R"({"api":"x","components":[]})"), CorpusError);
    CHECK_THROWS_AS(from_text(R"({"api":"x","components":[{"summary":"a"}]})"), CorpusError);
    CHECK_THROWS_AS(from_text(R"({"api":"x","components":[{"id":"f","summary":""}]})"), CorpusError);
    CHECK_THROWS_AS(from_text(R"({"api":"x","components":[{"id":"f","summary":3}]})"), CorpusError);
    CHECK_NOTHROW(from_text(R"({"api":"x","components":[{"id":"f","summary":"","properties":{"returns":"int"}}]})"));
    try {
        from_text(R"({"api":"x","components":[{"id":"good","summary":"a"},{"id":"bad","summary":7}]})");
        FAIL("expected a schema error");
    } catch (const CorpusError& e) {
        CHECK(std::string(e.what()).find("bad") != std::string::npos);
    }
    CHECK_THROWS_AS(load_dataset("/nonexistent/corpus.json"), CorpusError);
}

TEST_CASE("properties keep file order and round-trip through JSON") {
    const auto d = fixtures::toy3();
    CHECK(d->component(0).property_names() ==
          std::vector<std::string>{"signature", "summary", "description", "returns"});
    const auto again = parse_dataset(dataset_to_json(*d));
    REQUIRE(again.size() == d->size());
    for (std::size_t c = 0; c < d->size(); ++c) {
        CHECK(again.component(c).properties == d->component(c).properties);
        CHECK(again.search_vector(c).value == d->search_vector(c).value);
    }
}

TEST_CASE("identical sub-vectors give a unit vector on the shared term") {
    ApiComponent c = make("send", "send", {{"description", "send"}});
    c.signature.name = "send";
    const auto d = ApiDataset::build("x", {c, make("recv", "receive data")});
    const auto& v = d.search_vector(0);
    REQUIRE(v.nnz() == 1);
    CHECK(d.vocabulary()[v.index[0]] == "send");
    CHECK(v.value[0] == doctest::Approx(1.0));
}

TEST_CASE("no other properties: normalized mean of signature and summary") {
    ApiComponent c = make("f", "alpha beta");
    c.signature.name = "gamma";
    const auto d = ApiDataset::build("x", {c});
    // All three terms have df = 1, so equal idf; sig = e_gamma, summary = (e_a + e_b)/sqrt2.
    const double a = 0.5 / std::sqrt(2.0);
    const double g = 0.5;
    const double norm = std::sqrt(2 * a * a + g * g);
    CHECK(d.search_vector(0).at(*d.term_index("gamma")) == doctest::Approx(g / norm));
    CHECK(d.search_vector(0).at(*d.term_index("alpha")) == doctest::Approx(a / norm));
}

TEST_CASE("component with no tokens gets the zero vector and a warning") {
    ApiComponent c = make("f", ",,,");
    const auto d = ApiDataset::build("x", {c, make("g", "real words")});
    CHECK(d.search_vector(0).empty());
    CHECK(d.warnings().size() == 1);
}

TEST_CASE("toy corpus vectors, scores and keywords match the brute-force oracle") {
    SearchCriteria write_known;
    write_known.query = "write known host";
    SearchCriteria keyword_only;
    keyword_only.provided_keywords = {"write"};
    SearchCriteria rejected;
    rejected.query = "ssh session connect";
    rejected.rejected_components = {"ssh_connect"};
    rejected.rejected_keywords = {"int"};
    check_against_oracle(*fixtures::toy3(), {{}, write_known, keyword_only, rejected});
}

TEST_CASE("synthetic corpora of 50 and 300 components match the oracle") {
    for (std::size_t n : {50u, 300u}) {
        const auto d = fixtures::synthetic(n);
        std::vector<SearchCriteria> searches(1);
        Rng rng(n);
        for (int i = 0; i < 5; ++i) {
            SearchCriteria s;
            std::string q;
            for (int t = 0; t < 4; ++t) q += d->vocabulary()[rng.below(d->vocabulary().size())] + " ";
            s.query = q;
            if (i % 2 == 0) s.provided_keywords = {d->vocabulary()[rng.below(d->vocabulary().size())]};
            if (i % 3 == 0) s.rejected_components = {d->id(rng.below(d->size()))};
            searches.push_back(s);
        }
        check_against_oracle(*d, searches);
    }
}

TEST_CASE("query matching one component's whole vocabulary ranks it first with s = 1") {
    const auto d = ApiDataset::build("x", {make("a", "alpha beta"), make("b", "gamma delta")});
    SearchCriteria s;
    s.query = "alpha beta";
    const auto r = score_and_rank(d, s, 1);
    CHECK(r.ranking().front() == 0);
    CHECK(r.top_score() == doctest::Approx(1.0));
    CHECK(r.scores()[1] == 0.0);
}

TEST_CASE("filters: rejected components and provided keywords") {
    const auto d = fixtures::toy3();
    SearchCriteria s;
    s.query = "ssh connect";
    s.rejected_components = {"ssh_connect"};
    auto r = score_and_rank(*d, s, 3);
    CHECK(r.scores()[*d->find("ssh_connect")] == 0.0);

    SearchCriteria k;
    k.provided_keywords = {"knownhost"};
    r = score_and_rank(*d, k, 3);
    CHECK(r.scores()[*d->find("ssh_write_knownhost")] == 1.0);
    CHECK(r.scores()[*d->find("ssh_connect")] == 0.0);
    CHECK(r.positive_count() == 1);

    SearchCriteria unknown;
    unknown.provided_keywords = {"zzz"};
    CHECK(score_and_rank(*d, unknown, 3).positive_count() == 0);

    SearchCriteria bad;
    bad.rejected_components = {"nope"};
    CHECK_THROWS_AS(score_and_rank(*d, bad, 3), ContractError);
    SearchCriteria overlap;
    overlap.provided_keywords = {"a"};
    overlap.rejected_keywords = {"a"};
    CHECK_THROWS_AS(score_and_rank(*d, overlap, 3), ContractError);
}

TEST_CASE("ranking is a deterministic permutation, ties broken by the seed") {
    const auto d = fixtures::synthetic(50);
    const SearchCriteria none;
    const auto a = score_and_rank(*d, none, 5);
    const auto b = score_and_rank(*d, none, 5);
    CHECK(a.ranking() == b.ranking());
    auto sorted = a.ranking();
    std::sort(sorted.begin(), sorted.end());
    for (std::uint32_t i = 0; i < sorted.size(); ++i) CHECK(sorted[i] == i);
    bool any_different = false;
    for (std::uint64_t seed = 6; seed < 12; ++seed) any_different |= score_and_rank(*d, none, seed).ranking() != a.ranking();
    CHECK(any_different);
    for (double s : a.scores()) CHECK(s == 1.0);
}

TEST_CASE("paging and suggestions walk the ranking without repeats") {
    RankedResults r(std::vector<double>(10, 1.0), {0, 1, 2, 3, 4, 5, 6, 7, 8, 9});
    CHECK(r.page(6) == std::vector<std::uint32_t>{0, 1, 2, 3, 4, 5});
    CHECK(r.result_index() == 6);
    CHECK(r.page(6) == std::vector<std::uint32_t>{6, 7, 8, 9});
    CHECK(r.result_index() == 10);
    CHECK(r.page(6).empty());
    CHECK(r.result_index() == 10);
    CHECK_THROWS_AS(r.next_suggestion(), ExhaustedResults);
    r.reset_cursor();
    CHECK(r.next_suggestion() == 0);
    CHECK(r.next_suggestion() == 1);
    CHECK(r.result_index() == 2);
    CHECK(r.rank_of(9) == 10);
}

TEST_CASE("keyword recommendations exclude query and keyword terms") {
    const auto d = fixtures::synthetic(50);
    SearchCriteria s;
    s.query = d->vocabulary()[3] + " " + d->vocabulary()[10];
    s.provided_keywords = {d->vocabulary()[3]};
    s.rejected_keywords = {d->vocabulary()[20]};
    const auto r = score_and_rank(*d, s, 1);
    const auto k = recommend_keywords(*d, r, s, 6);
    CHECK(k.size() <= 6);
    for (const auto& t : k) {
        CHECK(t != d->vocabulary()[3]);
        CHECK(t != d->vocabulary()[10]);
        CHECK(t != d->vocabulary()[20]);
    }
    CHECK(recommend_keywords(*d, r, s, 0).empty());
}

TEST_CASE("synthetic generator is deterministic and valid") {
    const auto a = generate_corpus_json(fixtures::spec(40, 3));
    const auto b = generate_corpus_json(fixtures::spec(40, 3));
    CHECK(a == b);
    CHECK(a != generate_corpus_json(fixtures::spec(40, 4)));
    const auto d = parse_dataset(a);
    CHECK(d.size() == 40);
    CHECK(d.api() == "fixture");
    for (std::size_t c = 0; c < d.size(); ++c) CHECK(d.search_vector(c).norm() == doctest::Approx(1.0));
}
