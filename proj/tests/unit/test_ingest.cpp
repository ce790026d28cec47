#include "ghicast/error.hpp"
#include "ghicast/ingest.hpp"
#include "ghicast/random.hpp"

#include "../oracles.hpp"
#include "../support.hpp"

#include <doctest.h>

#include <algorithm>
#include <set>

using namespace ghicast;
using namespace ghicast::ingest;
using ghicast::testing::at;
using ghicast::testing::TempDir;
using ghicast::testing::write_file;

namespace {

std::vector<ImageRecord> records(const std::vector<Timestamp>& times)
{
    std::vector<ImageRecord> out;
    for (auto t : times) {
        out.push_back({t, format_compact(t) + ".jpg", 0});
    }
    return out;
}

std::vector<GhiReading> readings(const std::vector<Timestamp>& times)
{
    std::vector<GhiReading> out;
    for (std::size_t i = 0; i < times.size(); ++i) {
        out.push_back({times[i], double(i)});
    }
    return out;
}

std::vector<AlignedSample> samples_at(const std::vector<Timestamp>& times)
{
    std::vector<AlignedSample> out;
    for (std::size_t i = 0; i < times.size(); ++i) {
        out.push_back({times[i], {times[i], "", 0}, double(i)});
    }
    return out;
}

} // namespace

TEST_CASE("timestamps parse and format as UTC ISO-8601")
{
    const Timestamp t = parse_iso8601("2016-06-01T12:10:00Z");
    CHECK(t == make_timestamp(2016, 6, 1, 12, 10, 0));
    CHECK(parse_iso8601("2016-06-01 12:10:00") == t);
    CHECK(format_iso8601(t) == "2016-06-01T12:10:00Z");
    CHECK(format_compact(t) == "20160601121000");
    CHECK_THROWS_AS(parse_iso8601("2016-13-01T00:00:00Z"), ParseError);
    CHECK_THROWS_AS(parse_iso8601("yesterday"), ParseError);
    CHECK(local_hour(make_timestamp(2016, 6, 1, 19, 0, 0), -420) == 12);
    CHECK(local_hour(make_timestamp(2016, 6, 1, 3, 0, 0), -420) == 20);
}

TEST_CASE("load_ghi_series reads rows in order")
{
    TempDir dir;
    write_file(dir / "ghi.csv", "timestamp_utc,ghi_wm2\n2016-06-01T12:10:00Z,820\n2016-06-01T12:00:00Z,800\n");
    const GhiSeries s = load_ghi_series(dir / "ghi.csv");
    REQUIRE(s.readings.size() == 2);
    CHECK(s.readings[0].timestamp == at(12, 0));
    CHECK(s.readings[0].ghi == 800.0);
    CHECK(s.readings[1].ghi == 820.0);
    CHECK(s.clamped == 0);
}

TEST_CASE("negative GHI is clamped and counted")
{
    TempDir dir;
    write_file(dir / "ghi.csv", "timestamp_utc,ghi_wm2\n2016-06-01T12:00:00Z,-3.2\n");
    const GhiSeries s = load_ghi_series(dir / "ghi.csv");
    REQUIRE(s.readings.size() == 1);
    CHECK(s.readings[0].ghi == 0.0);
    CHECK(s.clamped == 1);
}

TEST_CASE("same-minute duplicates keep the last row")
{
    TempDir dir;
    write_file(dir / "ghi.csv",
        "timestamp_utc,ghi_wm2\n2016-06-01T12:00:00Z,700\n2016-06-01T12:10:00Z,650\n2016-06-01T12:00:30Z,710\n");
    const GhiSeries s = load_ghi_series(dir / "ghi.csv");
    REQUIRE(s.readings.size() == 2);
    CHECK(s.readings[0].timestamp == at(12, 0));
    CHECK(s.readings[0].ghi == 710.0);
    CHECK(s.readings[1].ghi == 650.0);
    CHECK(s.duplicates == 1);
}

TEST_CASE("GHI loader errors")
{
    TempDir dir;
    CHECK_THROWS_AS(load_ghi_series(dir / "missing.csv"), IoError);

    write_file(dir / "bad.csv", "timestamp_utc,ghi_wm2\n2016-06-01T12:00:00Z,700\n2016-06-01T12:10:00Z,abc\n");
    try {
        load_ghi_series(dir / "bad.csv");
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        CHECK(std::string(e.what()).find(":3:") != std::string::npos);
    }

    write_file(dir / "empty.csv", "timestamp_utc,ghi_wm2\n");
    CHECK_THROWS_AS(load_ghi_series(dir / "empty.csv"), EmptyInputError);
}

TEST_CASE("scan_image_directory parses, orders and skips")
{
    TempDir dir;
    write_file(dir / "20160601121000.jpg", "x");
    write_file(dir / "20160601120000.jpg", "xy");
    write_file(dir / "README.txt", "notes");
    const ImageScan scan = scan_image_directory(dir.path());
    REQUIRE(scan.records.size() == 2);
    CHECK(scan.records[0].timestamp == at(12, 0));
    CHECK(scan.records[1].timestamp == at(12, 10));
    CHECK(scan.records[0].byte_size == 2);
    CHECK(scan.skipped == 1);
}

TEST_CASE("scan output is timestamp-sorted regardless of creation order")
{
    TempDir dir;
    std::vector<Timestamp> times;
    for (int i = 0; i < 100; ++i) {
        times.push_back(at(0, 0) + std::chrono::minutes{10 * i});
    }
    std::vector<Timestamp> shuffled = times;
    Rng rng(3);
    rng.shuffle(shuffled);
    for (auto t : shuffled) {
        write_file(dir / ("sub/" + format_compact(t) + ".png"), "");
    }
    const ImageScan scan = scan_image_directory(dir.path());
    REQUIRE(scan.records.size() == 100);
    std::vector<Timestamp> parsed;
    for (const auto& r : scan.records) {
        parsed.push_back(r.timestamp);
    }
    std::vector<Timestamp> expected = shuffled;
    std::sort(expected.begin(), expected.end());
    CHECK(parsed == expected);
}

TEST_CASE("custom filename patterns")
{
    TempDir dir;
    write_file(dir / "asi16_2017-03-05_08h40m00.jpeg", "");
    write_file(dir / "asi16_garbage.jpeg", "");
    const ImageScan scan = scan_image_directory(dir.path(), "*_YYYY-MM-DD_HHhMMmSS");
    REQUIRE(scan.records.size() == 1);
    CHECK(scan.records[0].timestamp == make_timestamp(2017, 3, 5, 8, 40, 0));
    CHECK(scan.skipped == 1);
    CHECK_THROWS_AS(scan_image_directory(dir.path(), "YYYYMMDD"), ConfigError);
}

TEST_CASE("scan errors")
{
    TempDir dir;
    CHECK_THROWS_AS(scan_image_directory(dir / "nope"), IoError);
    CHECK_THROWS_AS(scan_image_directory(dir.path()), EmptyInputError);
}

TEST_CASE("align pairs exact matches and drops far images")
{
    const auto exact = align(records({at(12, 0)}), readings({at(12, 0), at(12, 10)}), std::chrono::minutes{5});
    REQUIRE(exact.samples.size() == 1);
    CHECK(exact.samples[0].ghi == 0.0);

    const auto far = align(records({at(12, 4)}), readings({at(12, 10)}), std::chrono::minutes{5});
    CHECK(far.samples.empty());
    CHECK(far.dropped_images == 1);
}

TEST_CASE("a reading serves one image; ties go to the earlier reading")
{
    // Image at 12:05 is equidistant from both readings.
    const auto tie = align(records({at(12, 5)}), readings({at(12, 0), at(12, 10)}), std::chrono::minutes{5});
    REQUIRE(tie.samples.size() == 1);
    CHECK(tie.samples[0].ghi == 0.0);

    // Two images compete for the 12:00 reading; the closer one wins it.
    const auto contest
        = align(records({at(11, 58), at(12, 1)}), readings({at(12, 0)}), std::chrono::minutes{5});
    REQUIRE(contest.samples.size() == 1);
    CHECK(contest.samples[0].timestamp == at(12, 1));
    CHECK(contest.dropped_images == 1);
}

TEST_CASE("align agrees with an exhaustive matcher")
{
    Rng rng(11);
    for (int trial = 0; trial < 30; ++trial) {
        std::vector<Timestamp> image_times;
        std::vector<Timestamp> reading_times;
        for (int i = 0; i < 20; ++i) {
            const auto jitter = Seconds{long(rng.index(241)) - 120};
            image_times.push_back(at(10, 0) + std::chrono::minutes{10 * i} + jitter);
            reading_times.push_back(at(10, 0) + std::chrono::minutes{10 * i});
        }
        std::set<std::size_t> missing;
        while (missing.size() < 3) {
            missing.insert(rng.index(20));
        }
        std::vector<Timestamp> kept;
        for (std::size_t i = 0; i < reading_times.size(); ++i) {
            if (!missing.count(i)) {
                kept.push_back(reading_times[i]);
            }
        }
        const auto result = align(records(image_times), readings(kept), std::chrono::minutes{5});
        const auto expected = oracle::brute_align(image_times, kept, std::chrono::minutes{5});
        CHECK(result.samples.size() == 17);
        REQUIRE(result.samples.size() == expected.size());
        for (std::size_t i = 0; i < expected.size(); ++i) {
            CHECK(result.samples[i].timestamp == image_times[expected[i].first]);
            CHECK(result.samples[i].ghi == double(expected[i].second));
        }
        for (std::size_t i = 1; i < result.samples.size(); ++i) {
            CHECK(result.samples[i - 1].timestamp < result.samples[i].timestamp);
        }
    }
}

TEST_CASE("night filter drops dark samples outside daytime hours")
{
    // Local = UTC - 7h.
    std::vector<AlignedSample> s = samples_at({make_timestamp(2016, 6, 1, 8, 0, 0),
        make_timestamp(2016, 6, 1, 12, 0, 0), make_timestamp(2016, 6, 1, 19, 0, 0)});
    s[0].ghi = 0.0;  // 01:00 local, dark: removed
    s[1].ghi = 2.0;  // 05:00 local, inside [4,22]: kept
    s[2].ghi = 0.0;  // 12:00 local: kept
    CHECK(filter_night(s, NightFilter{}, -420) == 1);
    CHECK(s.size() == 2);

    std::vector<AlignedSample> bright = samples_at({make_timestamp(2016, 6, 1, 8, 0, 0)});
    bright[0].ghi = 50.0;
    CHECK(filter_night(bright, NightFilter{}, -420) == 0);

    NightFilter off;
    off.enabled = false;
    std::vector<AlignedSample> dark = samples_at({make_timestamp(2016, 6, 1, 8, 0, 0)});
    CHECK(filter_night(dark, off, -420) == 0);
}

TEST_CASE("chronological prefix split")
{
    const auto s = samples_at(testing::regular_times(10));
    const Split parts = split(s, {SplitKind::chronological_prefix, 0.7, SplitGranularity::sample, {}, 0, 0});
    REQUIRE(parts.train.size() == 7);
    REQUIRE(parts.test.size() == 3);
    CHECK(parts.train.back().timestamp < parts.test.front().timestamp);
    CHECK(parts.test.front().ghi == 7.0);
}

TEST_CASE("split errors")
{
    const auto s = samples_at(testing::regular_times(10));
    CHECK_THROWS_AS(split(s, {SplitKind::chronological_prefix, 1.0, SplitGranularity::sample, {}, 0, 0}), ConfigError);
    CHECK_THROWS_AS(split(s, {SplitKind::random_by_fraction, 0.0, SplitGranularity::sample, {}, 0, 0}), ConfigError);
    CHECK_THROWS_AS(split(samples_at({at(1, 0)}), SplitPolicy{}), ConfigError);
    CHECK_THROWS_AS(split(s, {SplitKind::random_by_year, 0.7, SplitGranularity::sample, {2020}, 0, 0}), ConfigError);
    CHECK_THROWS_AS(split(s, {SplitKind::random_by_year, 0.7, SplitGranularity::sample, {2016}, 0, 0}), ConfigError);
}

namespace {

std::vector<AlignedSample> multi_day(int days, int per_day)
{
    std::vector<Timestamp> times;
    for (int d = 0; d < days; ++d) {
        for (int i = 0; i < per_day; ++i) {
            times.push_back(make_timestamp(2016, 6, 1, 12, 0, 0) + std::chrono::hours{24 * d}
                + std::chrono::minutes{10 * i});
        }
    }
    return samples_at(times);
}

void check_partition(const std::vector<AlignedSample>& all, const Split& parts)
{
    CHECK(parts.train.size() + parts.test.size() == all.size());
    std::multiset<Timestamp> got;
    for (const auto& s : parts.train) {
        got.insert(s.timestamp);
    }
    for (const auto& s : parts.test) {
        CHECK(got.count(s.timestamp) == 0);
        got.insert(s.timestamp);
    }
    std::multiset<Timestamp> want;
    for (const auto& s : all) {
        want.insert(s.timestamp);
    }
    CHECK(got == want);
}

} // namespace

TEST_CASE("random splits are reproducible partitions")
{
    const auto all = multi_day(10, 12);
    for (auto unit : {SplitGranularity::sample, SplitGranularity::day}) {
        const SplitPolicy policy{SplitKind::random_by_fraction, 0.7, unit, {}, 0, 99};
        const Split a = split(all, policy);
        const Split b = split(all, policy);
        check_partition(all, a);
        REQUIRE(a.train.size() == b.train.size());
        for (std::size_t i = 0; i < a.train.size(); ++i) {
            CHECK(a.train[i].timestamp == b.train[i].timestamp);
        }
        for (std::size_t i = 1; i < a.train.size(); ++i) {
            CHECK(a.train[i - 1].timestamp < a.train[i].timestamp);
        }
    }

    // Day granularity keeps each UTC day whole.
    const Split days = split(all, {SplitKind::random_by_fraction, 0.7, SplitGranularity::day, {}, 0, 5});
    CHECK(days.train.size() == 7 * 12);
    std::set<int> train_days;
    for (const auto& s : days.train) {
        train_days.insert(int((s.timestamp - all.front().timestamp).count() / 86400));
    }
    for (const auto& s : days.test) {
        CHECK(train_days.count(int((s.timestamp - all.front().timestamp).count() / 86400)) == 0);
    }
}

TEST_CASE("random-by-year split selects exactly the test years")
{
    std::vector<Timestamp> times;
    for (int year = 2014; year <= 2017; ++year) {
        for (int i = 0; i < 25; ++i) {
            times.push_back(make_timestamp(year, 1 + unsigned(i % 12), 1 + unsigned(i), 12, 0, 0));
        }
    }
    std::sort(times.begin(), times.end());
    const auto all = samples_at(times);

    const Split listed = split(all, {SplitKind::random_by_year, 0.7, SplitGranularity::sample, {2015, 2017}, 0, 0});
    check_partition(all, listed);
    CHECK(listed.test.size() == 50);
    for (const auto& s : listed.test) {
        const int y = utc_year(s.timestamp);
        CHECK((y == 2015 || y == 2017));
    }
    for (const auto& s : listed.train) {
        const int y = utc_year(s.timestamp);
        CHECK((y == 2014 || y == 2016));
    }

    const SplitPolicy drawn{SplitKind::random_by_year, 0.7, SplitGranularity::sample, {}, 2, 17};
    const Split a = split(all, drawn);
    const Split b = split(all, drawn);
    check_partition(all, a);
    std::set<int> test_years;
    for (const auto& s : a.test) {
        test_years.insert(utc_year(s.timestamp));
    }
    CHECK(test_years.size() == 2);
    CHECK(a.test.size() == 50);
    CHECK(a.test.front().timestamp == b.test.front().timestamp);
}

TEST_CASE("gap counting")
{
    auto times = testing::regular_times(6);
    times[4] += std::chrono::minutes{30};
    times[5] += std::chrono::minutes{30};
    CHECK(count_gaps(samples_at(times), std::chrono::minutes{10}) == 1);
    CHECK(count_gaps(samples_at(testing::regular_times(6)), std::chrono::minutes{10}) == 0);
}
