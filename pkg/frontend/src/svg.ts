/** Minimal deterministic SVG document builder. */

function num(v: number): string {
  if (!Number.isFinite(v)) throw new Error(`non-finite coordinate ${v}`);
  return String(Math.round(v * 100) / 100);
}

function esc(s: string): string {
  return s.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

export class Svg {
  private parts: string[] = [];

  constructor(readonly width: number, readonly height: number,
              background = "#ffffff") {
    this.parts.push(
      `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" ` +
      `height="${height}" viewBox="0 0 ${width} ${height}">`,
      `<rect x="0" y="0" width="${width}" height="${height}" ` +
      `fill="${background}"/>`,
    );
  }

  open(tag: string, attrs: Record<string, string | number>): void {
    this.parts.push(`<${tag}${this.attrString(attrs)}>`);
  }

  close(tag: string): void {
    this.parts.push(`</${tag}>`);
  }

  private attrString(attrs: Record<string, string | number>): string {
    return Object.entries(attrs)
      .map(([k, v]) => ` ${k}="${typeof v === "number" ? num(v) : esc(v)}"`)
      .join("");
  }

  line(x1: number, y1: number, x2: number, y2: number,
       attrs: Record<string, string | number> = {}): void {
    this.parts.push(
      `<line x1="${num(x1)}" y1="${num(y1)}" x2="${num(x2)}" ` +
      `y2="${num(y2)}"${this.attrString(attrs)}/>`);
  }

  polyline(points: Array<[number, number]>,
           attrs: Record<string, string | number> = {}): void {
    const d = points
      .map(([x, y], i) => `${i === 0 ? "M" : "L"}${num(x)} ${num(y)}`)
      .join("");
    this.parts.push(`<path d="${d}" fill="none"${this.attrString(attrs)}/>`);
  }

  circle(cx: number, cy: number, r: number,
         attrs: Record<string, string | number> = {}): void {
    this.parts.push(`<circle cx="${num(cx)}" cy="${num(cy)}" ` +
      `r="${num(r)}"${this.attrString(attrs)}/>`);
  }

  rect(x: number, y: number, w: number, h: number,
       attrs: Record<string, string | number> = {}): void {
    this.parts.push(`<rect x="${num(x)}" y="${num(y)}" width="${num(w)}" ` +
      `height="${num(h)}"${this.attrString(attrs)}/>`);
  }

  text(x: number, y: number, content: string,
       attrs: Record<string, string | number> = {}): void {
    this.parts.push(`<text x="${num(x)}" y="${num(y)}"` +
      `${this.attrString(attrs)}>${esc(content)}</text>`);
  }

  image(x: number, y: number, w: number, h: number, pngBase64: string): void {
    this.parts.push(
      `<image x="${num(x)}" y="${num(y)}" width="${num(w)}" ` +
      `height="${num(h)}" preserveAspectRatio="none" ` +
      `image-rendering="pixelated" ` +
      `href="data:image/png;base64,${pngBase64}"/>`);
  }

  render(): string {
    return this.parts.join("\n") + "\n</svg>\n";
  }
}
