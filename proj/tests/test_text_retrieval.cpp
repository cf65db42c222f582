#include <doctest.h>

#include <algorithm>
#include <cstdlib>
#include <random>

#include "oracles.hpp"
#include "prove/text_retrieval.hpp"
#include "test_support.hpp"

using namespace prove;
using testing::error_code_of;

namespace {

SegmentList segs(std::vector<std::string> s) { return SegmentList{std::move(s)}; }

std::vector<std::filesystem::path> html_fixtures() {
  std::vector<std::filesystem::path> out;
  for (const auto& entry : std::filesystem::directory_iterator(testing::fixture("html"))) {
    if (entry.path().extension() == ".html") out.push_back(entry.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

// Word ending at position `stop` (inclusive), back to the previous space.
std::string word_before(const std::string& s, std::size_t stop) {
  std::size_t begin = s.rfind(' ', stop);
  begin = begin == std::string::npos ? 0 : begin + 1;
  return s.substr(begin, stop - begin + 1);
}

}  // namespace

// ---------------------------------------------------------------------------
// Cleaning

TEST_CASE("clean_html drops scripts and closes blocks with a full stop") {
  CHECK(clean_html("<p>Hello</p><script>x()</script>") == "Hello.");
}

TEST_CASE("clean_html removes navigation boilerplate") {
  CHECK(clean_html("<nav>Home | About</nav><p>Body text.</p>") == "Body text.");
  CHECK(clean_html("<div role=\"navigation\">Menu</div><p>Body text.</p>") == "Body text.");
  CHECK(clean_html("<footer>Contact</footer><p>Body text.</p>") == "Body text.");
}

TEST_CASE("clean_html joins text split across sibling spans") {
  CHECK(clean_html("<p><span>Paris is the</span><span>capital of France.</span></p>") ==
        "Paris is the capital of France.");
}

TEST_CASE("clean_html keeps sibling paragraphs apart") {
  CHECK(clean_html("<h2>First heading</h2><p>Second line</p>") == "First heading. Second line.");
  CHECK(clean_html("<p>One.</p><p>Two</p>") == "One. Two.");
  CHECK(clean_html("<p>Broken across</p><p>two tags</p>") == "Broken across two tags.");
  CHECK(clean_html("<p>One.</p><p>Two.</p>") == "One. Two.");
}

TEST_CASE("clean_html collapses whitespace inside text") {
  CHECK(clean_html("<p>  Paris\n   is\tthe capital.  </p>") == "Paris is the capital.");
}

TEST_CASE("clean_html decodes entities") {
  CHECK(clean_html("<p>Fish &amp; chips &#8212; &quot;tasty&quot;.</p>") ==
        "Fish & chips \xE2\x80\x94 \"tasty\".");
}

TEST_CASE("clean_html is lenient with malformed markup") {
  CHECK_NOTHROW(clean_html("<p>Unclosed <b>bold <i>text"));
  CHECK(clean_html("") == "");
  CHECK(clean_html("plain words") == "plain words.");
}

TEST_CASE("clean_html is idempotent on its own output") {
  for (const auto& path : html_fixtures()) {
    CAPTURE(path.filename().string());
    const std::string once = clean_html(testing::read_text(path));
    CHECK(clean_html(once) == once);
  }
  for (const char* text : {"A is B. C is D.", "Fish & chips < 3 > 2.", "No stop here"}) {
    const std::string once = clean_html(text);
    CHECK(clean_html(once) == once);
  }
}

// ---------------------------------------------------------------------------
// Segmentation

TEST_CASE("segment splits on sentence boundaries") {
  CHECK(segment("Rome is old. Paris is big.").segments == std::vector<std::string>{"Rome is old.", "Paris is big."});
  CHECK(segment("Is it? Yes! 42 follows.").segments ==
        std::vector<std::string>{"Is it?", "Yes!", "42 follows."});
  CHECK(segment("He said \"Go.\" Then he left.").segments ==
        std::vector<std::string>{"He said \"Go.\"", "Then he left."});
}

TEST_CASE("segment respects the abbreviation guard") {
  const RuleSegmenter segmenter;
  CHECK(segmenter.abbreviations().count("Dr.") == 1);
  CHECK(segmenter.is_guarded("Dr."));
  CHECK(segment("Dr. Smith arrived.").size() == 1);
  CHECK(segment("James H. Billington was sworn in.").size() == 1);
  CHECK(segment("It cost 5 dollars. Mr. Jones paid.").segments ==
        std::vector<std::string>{"It cost 5 dollars.", "Mr. Jones paid."});
}

TEST_CASE("segment does not split before lower-case words") {
  CHECK(segment("Version 2.0 is out. see below.").size() == 1);
}

TEST_CASE("segment handles empty and whitespace input") {
  CHECK(segment("").empty());
  CHECK(segment("   \n\t ").empty());
}

TEST_CASE("segment recognises non-ASCII sentence openers") {
  CHECK(segment("He moved to Zürich. Ærø is an island.").size() == 2);
  CHECK(segment("It was cold. Øresund froze. Élan returned.").size() == 3);
}

TEST_CASE("custom abbreviation lists replace the bundled one") {
  const RuleSegmenter bare(std::unordered_set<std::string>{});
  CHECK(bare.segment("See Dr. Smith.").size() == 2);
  const auto parsed = parse_abbreviations("# comment\nDr.\n\nProf.\n");
  CHECK(parsed == std::unordered_set<std::string>{"Dr.", "Prof."});
  CHECK(default_abbreviations().count("e.g.") == 1);
}

TEST_CASE("segments are never empty and contain no unguarded boundary") {
  std::vector<std::string> texts;
  for (const auto& path : html_fixtures()) texts.push_back(clean_html(testing::read_text(path)));
  std::mt19937 rng(3);
  const std::vector<std::string> words = {"Dr.", "paris", "The", "e.g.", "Smith", "is",
                                          "42",  "U.S.", "a",   "B.",   "end.",  "Go!"};
  for (int t = 0; t < 200; ++t) {
    std::string text;
    const int n = static_cast<int>(rng() % 25) + 1;
    for (int i = 0; i < n; ++i) {
      if (i) text += " ";
      text += words[rng() % words.size()];
    }
    texts.push_back(text);
  }
  const RuleSegmenter segmenter;
  for (const auto& text : texts) {
    for (const auto& s : segment(text).segments) {
      CAPTURE(s);
      CHECK(s.find_first_not_of(" \t\r\n") != std::string::npos);
      for (std::size_t i = 0; i + 2 < s.size(); ++i) {
        if (s[i] == '.' && s[i + 1] == ' ' && std::isupper(static_cast<unsigned char>(s[i + 2]))) {
          CHECK(segmenter.is_guarded(word_before(s, i)));
        }
      }
    }
  }
}

// ---------------------------------------------------------------------------
// Windowing

TEST_CASE("window enumerates every span for each size") {
  const auto p = window(segs({"a", "b", "c"}), WindowConfig{});
  REQUIRE(p.size() == 5);
  CHECK(p[0] == Passage{"a", 1, 0});
  CHECK(p[2] == Passage{"c", 1, 2});
  CHECK(p[3] == Passage{"a b", 2, 0});
  CHECK(p[4] == Passage{"b c", 2, 1});
}

TEST_CASE("window with one segment yields no pairs") {
  const auto p = window(segs({"a"}), WindowConfig{});
  REQUIRE(p.size() == 1);
  CHECK(p[0].text == "a");
  CHECK(window(segs({}), WindowConfig{}).empty());
}

TEST_CASE("window keeps duplicate texts with distinct spans") {
  const auto p = window(segs({"x", "x"}), WindowConfig{{1}});
  REQUIRE(p.size() == 2);
  CHECK(p[0].text == p[1].text);
  CHECK(p[0].start_index != p[1].start_index);
}

TEST_CASE("window configuration must be non-empty and positive") {
  CHECK(error_code_of([] { WindowConfig{{}}.check(); }) == ErrorCode::kInvalidArgument);
  CHECK(error_code_of([] { WindowConfig{{0, 1}}.check(); }) == ErrorCode::kInvalidArgument);
  CHECK_NOTHROW(WindowConfig{{1, 3}}.check());
}

TEST_CASE("window matches the enumeration oracle and reconstructs spans") {
  std::mt19937 rng(5);
  for (int t = 0; t < 100; ++t) {
    std::vector<std::string> s;
    const std::size_t n = rng() % 12;
    for (std::size_t i = 0; i < n; ++i) s.push_back("s" + std::to_string(rng() % 4));
    const std::vector<std::size_t> sizes = {1, 2, 3};
    const auto got = window(segs(s), WindowConfig{{1, 2, 3}});
    const auto want = oracle::windows(s, sizes);
    REQUIRE(got.size() == want.size());
    for (std::size_t i = 0; i < got.size(); ++i) {
      CHECK(got[i].window_size == want[i].n);
      CHECK(got[i].start_index == want[i].i);
      CHECK(got[i].text == want[i].text);
      CHECK(got[i].text == join_segments(segs(s), got[i].start_index, got[i].window_size));
    }
  }
}

// ---------------------------------------------------------------------------
// Golden extraction outputs

TEST_CASE("fixture extractions match their pinned outputs") {
  const auto fixtures = html_fixtures();
  CHECK(fixtures.size() >= 10);
  const bool update = std::getenv("PROVE_UPDATE_GOLDEN") != nullptr;
  for (const auto& path : fixtures) {
    const auto golden = testing::fixture("golden") / (path.stem().string() + ".txt");
    const std::string rendered = testing::render_extraction(testing::read_text(path));
    if (update) testing::write_text(golden, rendered);
    CAPTURE(path.filename().string());
    REQUIRE(std::filesystem::exists(golden));
    CHECK(rendered == testing::read_text(golden));
  }
}

// ---------------------------------------------------------------------------
// Fetching

TEST_CASE("file URLs are read verbatim") {
  const auto path = testing::fixture("html/script_injection.html");
  const std::string url = "file://" + path.string();
  const auto r = fetch(url);
  CHECK(r.final_url == url);
  CHECK(r.html == testing::read_text(path));
  CHECK(error_code_of([] { fetch("file:///nonexistent/page.html"); }) ==
        ErrorCode::kUnavailable);
}

TEST_CASE("file URLs work offline and unsupported schemes are rejected") {
  FetchOptions offline;
  offline.offline = true;
  const auto path = testing::fixture("html/malformed.html");
  CHECK_NOTHROW(fetch("file://" + path.string(), offline));
  CHECK(error_code_of([&] { fetch("https://example.org/", offline); }) == ErrorCode::kOffline);
  CHECK(error_code_of([] { fetch("ftp://example.org/x"); }) == ErrorCode::kInvalidArgument);
}

TEST_CASE("http fetch follows redirects and classifies failures") {
  testing::LocalServer server;
  auto& s = server.server();
  s.Get("/page", [](const httplib::Request&, httplib::Response& res) {
    res.set_content("<p>Target page.</p>", "text/html; charset=utf-8");
  });
  s.Get("/moved", [](const httplib::Request&, httplib::Response& res) {
    res.set_redirect("/page");
  });
  s.Get("/missing", [](const httplib::Request&, httplib::Response& res) { res.status = 404; });
  s.Get("/broken", [](const httplib::Request&, httplib::Response& res) { res.status = 502; });
  s.Get("/data", [](const httplib::Request&, httplib::Response& res) {
    res.set_content("{}", "application/json");
  });
  s.Get("/slow", [](const httplib::Request&, httplib::Response& res) {
    std::this_thread::sleep_for(std::chrono::milliseconds(800));
    res.set_content("<p>late</p>", "text/html");
  });
  server.start();

  const auto direct = fetch(server.url("/page"));
  CHECK(direct.final_url == server.url("/page"));
  CHECK(direct.html == "<p>Target page.</p>");

  const auto redirected = fetch(server.url("/moved"));
  CHECK(redirected.final_url != server.url("/moved"));
  CHECK(redirected.final_url == server.url("/page"));
  CHECK(redirected.html == "<p>Target page.</p>");

  CHECK(error_code_of([&] { fetch(server.url("/missing")); }) == ErrorCode::kUnavailable);
  CHECK(error_code_of([&] { fetch(server.url("/broken")); }) == ErrorCode::kUnavailable);
  CHECK(error_code_of([&] { fetch(server.url("/data")); }) == ErrorCode::kNotHtml);

  FetchOptions quick;
  quick.timeout = std::chrono::milliseconds(200);
  CHECK(error_code_of([&] { fetch(server.url("/slow"), quick); }) == ErrorCode::kTimeout);

  const auto all = fetch_all({server.url("/page"), server.url("/missing"), server.url("/moved")},
                             FetchOptions{}, 2);
  REQUIRE(all.size() == 3);
  CHECK(all[0].result.has_value());
  CHECK(all[1].error.has_value());
  CHECK(all[1].error->code() == ErrorCode::kUnavailable);
  CHECK(all[2].result->final_url == server.url("/page"));
}
