#include "ghicast/image.hpp"

#include "ghicast/error.hpp"

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>

namespace ghicast {

RgbImage decode_image(const std::filesystem::path& path)
{
    cv::Mat bgr;
    try {
        bgr = cv::imread(path.string(), cv::IMREAD_COLOR);
    } catch (const cv::Exception& e) {
        throw DecodeError("cannot decode " + path.string() + ": " + e.what());
    }
    if (bgr.empty() || bgr.type() != CV_8UC3) {
        throw DecodeError("cannot decode " + path.string());
    }

    RgbImage image;
    image.width = bgr.cols;
    image.height = bgr.rows;
    image.pixels.resize(std::size_t(image.width) * image.height * 3);
    for (int r = 0; r < bgr.rows; ++r) {
        const auto* row = bgr.ptr<cv::Vec3b>(r);
        for (int c = 0; c < bgr.cols; ++c) {
            image.at(r, c, 0) = row[c][2];
            image.at(r, c, 1) = row[c][1];
            image.at(r, c, 2) = row[c][0];
        }
    }
    return image;
}

void write_png(const RgbImage& image, const std::filesystem::path& path)
{
    cv::Mat bgr(image.height, image.width, CV_8UC3);
    for (int r = 0; r < image.height; ++r) {
        auto* row = bgr.ptr<cv::Vec3b>(r);
        for (int c = 0; c < image.width; ++c) {
            row[c] = cv::Vec3b(image.at(r, c, 2), image.at(r, c, 1), image.at(r, c, 0));
        }
    }
    bool ok = false;
    try {
        ok = cv::imwrite(path.string(), bgr, {cv::IMWRITE_PNG_COMPRESSION, 6});
    } catch (const cv::Exception& e) {
        throw IoError("cannot write " + path.string() + ": " + e.what());
    }
    if (!ok) {
        throw IoError("cannot write " + path.string());
    }
}

} // namespace ghicast
