#include "docrect/codec.hpp"

#include <png.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <csetjmp>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>

// jpeglib.h needs size_t and FILE declared first
#include <jpeglib.h>

#include "docrect/error.hpp"

namespace docrect {

namespace {

constexpr std::uint8_t kPngSignature[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};

[[noreturn]] void throw_decode(const char* codec, std::size_t offset, const std::string& msg) {
  std::ostringstream os;
  os << codec << " decode error at byte offset " << offset << ": " << msg;
  throw FormatError(os.str());
}

// ---------------------------------------------------------------- PNG

struct PngReadState {
  std::span<const std::uint8_t> bytes;
  std::size_t pos = 0;
  char message[256] = {};
};

void png_read_bytes(png_structp png, png_bytep out, png_size_t len) {
  auto* st = static_cast<PngReadState*>(png_get_io_ptr(png));
  if (st->pos + len > st->bytes.size()) png_error(png, "unexpected end of stream");
  std::memcpy(out, st->bytes.data() + st->pos, len);
  st->pos += len;
}

void png_on_error(png_structp png, png_const_charp msg) {
  auto* st = static_cast<PngReadState*>(png_get_error_ptr(png));
  std::snprintf(st->message, sizeof(st->message), "%s", msg);
  png_longjmp(png, 1);
}

void png_on_warning(png_structp, png_const_charp) {}

ImagePlane decode_png(std::span<const std::uint8_t> bytes) {
  PngReadState st;
  st.bytes = bytes;
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, &st, png_on_error, png_on_warning);
  if (!png) throw_decode("PNG", 0, "cannot allocate decoder");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    throw_decode("PNG", 0, "cannot allocate decoder");
  }
  // rows must survive a longjmp, so they are plain heap storage owned here
  std::vector<std::uint8_t>* raw = new std::vector<std::uint8_t>();
  std::vector<png_bytep>* rows = new std::vector<png_bytep>();

  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    delete raw;
    delete rows;
    throw_decode("PNG", st.pos, st.message);
  }

  png_set_read_fn(png, &st, png_read_bytes);
  png_read_info(png, info);

  int color = png_get_color_type(png, info);
  int depth = png_get_bit_depth(png, info);
  if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(png);
  if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
  if (depth == 16) png_set_swap(png);  // host order on little-endian
  png_read_update_info(png, info);

  const png_uint_32 w = png_get_image_width(png, info);
  const png_uint_32 h = png_get_image_height(png, info);
  const int ch = png_get_channels(png, info);
  const int bd = png_get_bit_depth(png, info);
  const std::size_t rowbytes = png_get_rowbytes(png, info);
  raw->resize(rowbytes * h);
  rows->resize(h);
  for (png_uint_32 y = 0; y < h; ++y) (*rows)[y] = raw->data() + y * rowbytes;
  png_read_image(png, rows->data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);

  const int out_c = ch >= 3 ? 3 : 1;
  ImagePlane img(static_cast<int>(h), static_cast<int>(w), out_c);
  const float denom = bd == 16 ? 65535.0f : 255.0f;
  for (png_uint_32 y = 0; y < h; ++y) {
    for (png_uint_32 x = 0; x < w; ++x) {
      for (int c = 0; c < out_c; ++c) {
        std::size_t idx = static_cast<std::size_t>(x) * ch + c;
        unsigned v;
        if (bd == 16) {
          std::uint16_t s;
          std::memcpy(&s, (*rows)[y] + idx * 2, 2);
          v = s;
        } else {
          v = (*rows)[y][idx];
        }
        img.at(static_cast<int>(y), static_cast<int>(x), c) = static_cast<float>(v) / denom;
      }
    }
  }
  delete raw;
  delete rows;
  return img;
}

struct PngWriteState {
  std::vector<std::uint8_t> out;
  char message[256] = {};
};

void png_write_bytes(png_structp png, png_bytep data, png_size_t len) {
  auto* st = static_cast<PngWriteState*>(png_get_io_ptr(png));
  st->out.insert(st->out.end(), data, data + len);
}

void png_flush_noop(png_structp) {}

std::uint8_t quantize(float v) {
  return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0f, 1.0f) * 255.0f));
}

// ---------------------------------------------------------------- JPEG

struct JpegErrorState {
  jpeg_error_mgr mgr;
  std::jmp_buf jump;
  char message[JMSG_LENGTH_MAX] = {};
};

void jpeg_on_error(j_common_ptr cinfo) {
  auto* st = reinterpret_cast<JpegErrorState*>(cinfo->err);
  (*cinfo->err->format_message)(cinfo, st->message);
  std::longjmp(st->jump, 1);
}

void jpeg_silence(j_common_ptr, int) {}

ImagePlane decode_jpeg(std::span<const std::uint8_t> bytes) {
  jpeg_decompress_struct cinfo;
  JpegErrorState err;
  cinfo.err = jpeg_std_error(&err.mgr);
  err.mgr.error_exit = jpeg_on_error;
  err.mgr.emit_message = jpeg_silence;
  // assigned after setjmp, hence volatile
  ImagePlane* volatile img = nullptr;
  std::vector<std::uint8_t>* volatile row = nullptr;

  if (setjmp(err.jump)) {
    std::size_t offset = bytes.size();
    if (cinfo.src) offset = bytes.size() - cinfo.src->bytes_in_buffer;
    jpeg_destroy_decompress(&cinfo);
    delete img;
    delete row;
    throw_decode("JPEG", offset, err.message);
  }

  jpeg_create_decompress(&cinfo);
  jpeg_mem_src(&cinfo, bytes.data(), static_cast<unsigned long>(bytes.size()));
  jpeg_read_header(&cinfo, TRUE);
  if (cinfo.num_components != 1) cinfo.out_color_space = JCS_RGB;
  jpeg_start_decompress(&cinfo);

  const int w = static_cast<int>(cinfo.output_width);
  const int h = static_cast<int>(cinfo.output_height);
  const int ch = cinfo.output_components;
  img = new ImagePlane(h, w, ch == 1 ? 1 : 3);
  row = new std::vector<std::uint8_t>(static_cast<std::size_t>(w) * ch);
  while (cinfo.output_scanline < cinfo.output_height) {
    const int y = static_cast<int>(cinfo.output_scanline);
    JSAMPROW ptr = row->data();
    jpeg_read_scanlines(&cinfo, &ptr, 1);
    for (int x = 0; x < w; ++x)
      for (int c = 0; c < img->channels; ++c)
        img->at(y, x, c) = static_cast<float>((*row)[static_cast<std::size_t>(x) * ch + c]) / 255.0f;
  }
  jpeg_finish_decompress(&cinfo);
  jpeg_destroy_decompress(&cinfo);
  ImagePlane out = std::move(*img);
  delete img;
  delete row;
  return out;
}

}  // namespace

ImagePlane decode_image(std::span<const std::uint8_t> bytes) {
  if (bytes.size() >= 8 && std::equal(bytes.begin(), bytes.begin() + 8, kPngSignature))
    return decode_png(bytes);
  if (bytes.size() >= 3 && bytes[0] == 0xFF && bytes[1] == 0xD8 && bytes[2] == 0xFF)
    return decode_jpeg(bytes);
  throw_decode("image", 0, "neither a PNG nor a JPEG signature");
}

std::vector<std::uint8_t> encode_png(const ImagePlane& img) {
  if (img.empty()) throw ShapeError("cannot encode an empty image");
  PngWriteState st;
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, &st,
                                            [](png_structp p, png_const_charp msg) {
                                              auto* s = static_cast<PngWriteState*>(png_get_error_ptr(p));
                                              std::snprintf(s->message, sizeof(s->message), "%s", msg);
                                              png_longjmp(p, 1);
                                            },
                                            png_on_warning);
  if (!png) throw FormatError("cannot allocate PNG encoder");
  png_infop info = png_create_info_struct(png);
  std::vector<std::uint8_t>* row = new std::vector<std::uint8_t>(static_cast<std::size_t>(img.width) * img.channels);
  if (!info || setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    delete row;
    throw FormatError(std::string("PNG encode error: ") + st.message);
  }
  png_set_write_fn(png, &st, png_write_bytes, png_flush_noop);
  png_set_IHDR(png, info, static_cast<png_uint_32>(img.width), static_cast<png_uint_32>(img.height), 8,
               img.channels == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x)
      for (int c = 0; c < img.channels; ++c)
        (*row)[static_cast<std::size_t>(x) * img.channels + c] = quantize(img.at(y, x, c));
    png_write_row(png, row->data());
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  delete row;
  return std::move(st.out);
}

std::vector<std::uint8_t> encode_jpeg(const ImagePlane& img, int quality) {
  if (img.empty()) throw ShapeError("cannot encode an empty image");
  jpeg_compress_struct cinfo;
  JpegErrorState err;
  cinfo.err = jpeg_std_error(&err.mgr);
  err.mgr.error_exit = jpeg_on_error;
  unsigned char* buffer = nullptr;
  unsigned long size = 0;
  std::vector<std::uint8_t>* row = new std::vector<std::uint8_t>(static_cast<std::size_t>(img.width) * img.channels);
  if (setjmp(err.jump)) {
    jpeg_destroy_compress(&cinfo);
    std::free(buffer);
    delete row;
    throw FormatError(std::string("JPEG encode error: ") + err.message);
  }
  jpeg_create_compress(&cinfo);
  jpeg_mem_dest(&cinfo, &buffer, &size);
  cinfo.image_width = static_cast<JDIMENSION>(img.width);
  cinfo.image_height = static_cast<JDIMENSION>(img.height);
  cinfo.input_components = img.channels;
  cinfo.in_color_space = img.channels == 1 ? JCS_GRAYSCALE : JCS_RGB;
  jpeg_set_defaults(&cinfo);
  jpeg_set_quality(&cinfo, std::clamp(quality, 1, 100), TRUE);
  jpeg_start_compress(&cinfo, TRUE);
  while (cinfo.next_scanline < cinfo.image_height) {
    const int y = static_cast<int>(cinfo.next_scanline);
    for (int x = 0; x < img.width; ++x)
      for (int c = 0; c < img.channels; ++c)
        (*row)[static_cast<std::size_t>(x) * img.channels + c] = quantize(img.at(y, x, c));
    JSAMPROW ptr = row->data();
    jpeg_write_scanlines(&cinfo, &ptr, 1);
  }
  jpeg_finish_compress(&cinfo);
  std::vector<std::uint8_t> out(buffer, buffer + size);
  jpeg_destroy_compress(&cinfo);
  std::free(buffer);
  delete row;
  return out;
}

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open '" + path.string() + "' for reading");
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return bytes;
}

void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FormatError("cannot open '" + path.string() + "' for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw FormatError("failed writing '" + path.string() + "'");
}

ImagePlane read_image(const std::filesystem::path& path) {
  auto bytes = read_file(path);
  try {
    return decode_image(bytes);
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

void write_image(const std::filesystem::path& path, const ImagePlane& img) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  if (ext == ".jpg" || ext == ".jpeg")
    write_file(path, encode_jpeg(img));
  else
    write_file(path, encode_png(img));
}

}  // namespace docrect
