class PathWriter {
    private String filePath;
    private String name;
    private String dir;

    void persist(String p) {
    }

    void touch() {
        filePath = filePath.trim();
        name = name.trim();
        dir = dir.trim();
    }

    public void save() {
        // <start>
        persist(path);
        // <end>
    }
}
