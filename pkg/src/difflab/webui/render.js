// Rendering: canvas for the animated point cloud (keeps thousands of
// points smooth), SVG for contour polylines and selected path traces
// (stays crisp at any zoom).
/** World -> pixel transform; y flips so world-up is screen-up. */
export function toPixel(vp, x, y) {
    const [xmin, xmax, ymin, ymax] = vp.bounds;
    const px = ((x - xmin) / (xmax - xmin)) * vp.width;
    const py = (1 - (y - ymin) / (ymax - ymin)) * vp.height;
    return [px, py];
}
/** Pixel -> world transform (canvas clicks, drawing). */
export function toWorld(vp, px, py) {
    const [xmin, xmax, ymin, ymax] = vp.bounds;
    const x = xmin + (px / vp.width) * (xmax - xmin);
    const y = ymin + (1 - py / vp.height) * (ymax - ymin);
    return [x, y];
}
export function drawScatter(ctx, vp, frame, color, radius = 2, selected) {
    ctx.fillStyle = color;
    for (let i = 0; i < frame.xs.length; i++) {
        if (selected && selected.has(i))
            continue;
        const [px, py] = toPixel(vp, frame.xs[i], frame.ys[i]);
        ctx.beginPath();
        ctx.arc(px, py, radius, 0, 2 * Math.PI);
        ctx.fill();
    }
    if (selected && selected.size > 0) {
        ctx.fillStyle = "#ff8c00";
        for (const i of selected) {
            const [px, py] = toPixel(vp, frame.xs[i], frame.ys[i]);
            ctx.beginPath();
            ctx.arc(px, py, radius + 1, 0, 2 * Math.PI);
            ctx.fill();
        }
    }
}
export function drawPoints(ctx, vp, flat, color, radius = 1.5) {
    ctx.fillStyle = color;
    for (let k = 0; k < flat.length; k += 2) {
        const [px, py] = toPixel(vp, flat[k], flat[k + 1]);
        ctx.beginPath();
        ctx.arc(px, py, radius, 0, 2 * Math.PI);
        ctx.fill();
    }
}
function chainToPath(vp, chain) {
    const pts = chain.points;
    if (pts.length < 4)
        return "";
    let d = "";
    for (let k = 0; k < pts.length; k += 2) {
        const [px, py] = toPixel(vp, pts[k], pts[k + 1]);
        d += `${k === 0 ? "M" : "L"}${px.toFixed(1)},${py.toFixed(1)}`;
    }
    if (chain.closed)
        d += "Z";
    return d;
}
export function renderContours(svg, vp, density) {
    svg.querySelectorAll("path.contour").forEach((el) => el.remove());
    if (!density)
        return;
    const nLevels = density.contours.levels.length;
    density.contours.levels.forEach(({ chains }, li) => {
        const alpha = 0.35 + (0.65 * (li + 1)) / Math.max(nLevels, 1);
        for (const chain of chains) {
            const d = chainToPath(vp, chain);
            if (!d)
                continue;
            const path = document.createElementNS("http://www.w3.org/2000/svg", "path");
            path.setAttribute("class", "contour");
            path.setAttribute("d", d);
            path.setAttribute("fill", "none");
            path.setAttribute("stroke", `rgba(70, 110, 180, ${alpha.toFixed(2)})`);
            path.setAttribute("stroke-width", "1.5");
            svg.appendChild(path);
        }
    });
}
export function renderPathTraces(svg, vp, paths, upTo) {
    svg.querySelectorAll("path.trace").forEach((el) => el.remove());
    for (const pts of paths) {
        const lastIdx = Math.max(1, Math.round(upTo * (pts.length - 1)));
        let d = "";
        for (let k = 0; k <= lastIdx; k++) {
            const [px, py] = toPixel(vp, pts[k][0], pts[k][1]);
            d += `${k === 0 ? "M" : "L"}${px.toFixed(1)},${py.toFixed(1)}`;
        }
        const path = document.createElementNS("http://www.w3.org/2000/svg", "path");
        path.setAttribute("class", "trace");
        path.setAttribute("d", d);
        path.setAttribute("fill", "none");
        path.setAttribute("stroke", "rgba(255, 140, 0, 0.45)");
        path.setAttribute("stroke-width", "1");
        svg.appendChild(path);
    }
}
/** Loss sparkline on a small canvas; log scale when the range is wide. */
export function drawSparkline(ctx, losses) {
    const { width: w, height: h } = ctx.canvas;
    ctx.clearRect(0, 0, w, h);
    if (losses.length < 2)
        return;
    const lo = Math.min(...losses);
    const hi = Math.max(...losses);
    const span = hi - lo || 1;
    ctx.strokeStyle = "#2a7a2a";
    ctx.lineWidth = 1.5;
    ctx.beginPath();
    losses.forEach((loss, i) => {
        const px = (i / (losses.length - 1)) * (w - 4) + 2;
        const py = h - 3 - ((loss - lo) / span) * (h - 6);
        if (i === 0)
            ctx.moveTo(px, py);
        else
            ctx.lineTo(px, py);
    });
    ctx.stroke();
}
