#include <gtest/gtest.h>

#include <sstream>

#include "phd/rdf.hpp"
#include "test_util.hpp"

using namespace phd;
using phd::testing::T;

TEST(Dictionary, InternIsBijective) {
  Dictionary d;
  const auto a = d.intern("Lisa");
  const auto b = d.intern("MIT");
  EXPECT_EQ(d.intern("Lisa"), a);
  EXPECT_NE(a, b);
  EXPECT_EQ(d.resolve(a), "Lisa");
  EXPECT_EQ(d.resolve(b), "MIT");
  EXPECT_EQ(d.size(), 2u);
  TermId out = 99;
  EXPECT_TRUE(d.find("MIT", out));
  EXPECT_EQ(out, b);
  EXPECT_FALSE(d.find("Stanford", out));
}

TEST(Dictionary, TripleRoundTrip) {
  Dictionary d;
  const auto t = T("Lisa", "advisor", "Prof.James");
  EXPECT_EQ(d.resolve(d.intern(t)), t);
}

TEST(Dictionary, LiteralKind) {
  EXPECT_EQ(classify_term("\"hello world\""), TermKind::Literal);
  EXPECT_EQ(classify_term("Lisa"), TermKind::Iri);
}

TEST(TripleParser, AcademicFixture) {
  const auto ts = phd::testing::academic();
  ASSERT_EQ(ts.size(), 15u);
  EXPECT_EQ(ts.front(), T("Prof.Williams", "worksFor", "Stanford-CS"));
  EXPECT_EQ(ts.back(), T("MIT-CS", "type", "department"));
}

TEST(TripleParser, CommentsBlankLinesAndOptionalDot) {
  const auto ts = parse_triples("# header\n\nA p B .\nC q D\n  \n");
  ASSERT_EQ(ts.size(), 2u);
  EXPECT_EQ(ts[1], T("C", "q", "D"));
}

TEST(TripleParser, QuotedLiteralToken) {
  const auto ts = parse_triples("A age \"42\" .\n");
  ASSERT_EQ(ts.size(), 1u);
  EXPECT_EQ(ts[0].o, "\"42\"");
  EXPECT_THROW(parse_triples("A name \"Ada Lovelace\" .\n"), InputError);
}

TEST(TripleParser, BadLineNamesLine) {
  try {
    parse_triples("A p B .\nA p\n");
    FAIL() << "expected InputError";
  } catch (const InputError& e) {
    EXPECT_NE(std::string(e.what()).find("2"), std::string::npos);
  }
}

TEST(TripleParser, SerializeRoundTrip) {
  const auto ts = phd::testing::academic();
  EXPECT_EQ(parse_triples(serialize_triples(ts)), ts);
}

TEST(TripleParser, MissingFileThrows) { EXPECT_THROW(read_triple_file("/nonexistent/x.nt"), InputError); }
