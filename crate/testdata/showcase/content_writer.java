class ContentWriter {
    public void write(String content, OutputStream stream) {
        if (content == null) {
            return;
        }
        // <start>
        byte[] data = content.getBytes(encoding);
        stream.write(data);
        // <end>
    }
}
