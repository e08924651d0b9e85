#include <gtest/gtest.h>

#include "schro.hpp"

using namespace schro;

TEST(Json, SpectrumRoundTrip) {
  const SpectrumSet s({{-2.0, 2.0}, {3.0, 7.0}});
  const auto back = spectrum_from_json(json::parse(to_json(s).dump()));
  EXPECT_EQ(back.intervals(), s.intervals());
}

TEST(Json, MalformedSpectrumRejected) {
  EXPECT_THROW(spectrum_from_json(json::parse("{\"a\":1}")), Error);
}

TEST(Json, WindowRoundTrip) {
  const auto w = RealizationWindow::from_potential(-2, {0.0, 1.0, 0.5, 0.25, 2.0});
  const auto back = window_from_json(json::parse(to_json(w).dump()));
  EXPECT_EQ(back.n_min(), -2);
  EXPECT_EQ(back.potential(), w.potential());
}

TEST(Json, CertificateRoundTripVerifiesIdentically) {
  ConstructorParams p;
  p.n_back = p.n_fwd = 60;
  const auto c = construct(p);
  const auto doc = certificate_to_json(c);
  EXPECT_EQ(doc.at("schema_version"), kSchemaVersion);
  EXPECT_EQ(doc.at("background").at("kind"), "zero");
  const auto loaded = certificate_from_json(json::parse(doc.dump()));
  EXPECT_FALSE(loaded.background.has_value());
  EXPECT_EQ(loaded.certificate.word, c.word);
  EXPECT_EQ(loaded.certificate.u, c.u);
  EXPECT_EQ(loaded.certificate.energy, c.energy);
  EXPECT_EQ(verify_certificate(loaded.certificate).passed(), verify_certificate(c).passed());
}

TEST(Json, QuasiPeriodicCertificateRoundTrip) {
  QPParams p;
  p.n_back = p.n_fwd = 150;
  const QPBackground bg;
  const auto r = qp_construct(bg, 2.000357275721, p);
  const auto loaded = certificate_from_json(json::parse(certificate_to_json(r.certificate, bg).dump()));
  ASSERT_TRUE(loaded.background.has_value());
  EXPECT_EQ(loaded.background->c, bg.c);
  EXPECT_EQ(loaded.certificate.background, r.certificate.background);
  EXPECT_TRUE(verify_certificate(loaded.certificate).passed());
}

TEST(Json, TamperedCertificateRejectedOrFails) {
  ConstructorParams p;
  p.n_back = p.n_fwd = 40;
  auto doc = certificate_to_json(construct(p));
  doc["u"][10] = doc["u"][10].get<double>() * 2.0;
  const auto loaded = certificate_from_json(doc);
  EXPECT_FALSE(verify_certificate(loaded.certificate).passed());
  doc.erase("u");
  EXPECT_ANY_THROW(certificate_from_json(doc));
}

TEST(Json, UnknownWordCharacterRejected) {
  ConstructorParams p;
  p.n_back = p.n_fwd = 10;
  auto doc = certificate_to_json(construct(p));
  doc["word"] = std::string(21, '2');
  EXPECT_ANY_THROW(certificate_from_json(doc));
}
